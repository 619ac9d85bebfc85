"""Privacy-preserving multi-token optimistic rollup, simulated end to end."""
