"""Decision episodes and strategist implementations."""
