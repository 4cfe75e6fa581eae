"""Model core components."""
