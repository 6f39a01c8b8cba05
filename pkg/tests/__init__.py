"""TilingForge test suite."""
