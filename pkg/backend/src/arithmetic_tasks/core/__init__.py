"""Problem generation."""
