"""Player-visible state documents, token estimates and tool schemas."""
