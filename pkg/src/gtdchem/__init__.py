"""Geometrothermodynamic description of closed-system chemical reactions."""
