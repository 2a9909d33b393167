# Test suite for fractal_geom
