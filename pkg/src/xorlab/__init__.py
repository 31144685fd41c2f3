"""xorlab: XOR-hiding quantum encodings, CHSH-family games, and the
cheat-probability bounds of the oblivious-transfer protocols they induce."""

__version__ = "0.1.0"

from . import encodings, games, protocols, quantum, sdp, sequential, serialize

__all__ = [
    "encodings",
    "games",
    "protocols",
    "quantum",
    "sdp",
    "sequential",
    "serialize",
]
