"""Discovery training loops and evaluation."""
