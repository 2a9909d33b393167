"""Main entry point for fractal_geom package."""
from fractal_geom.cli import main

if __name__ == "__main__":
    main()
