"""Scripts package init for imports in tests."""
