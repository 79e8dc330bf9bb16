"""Framed stream server, REST facade and tool server."""
