"""Protocol registry: the oracle baseline plus the three evaluated protocols."""
from .base import RoutingProtocol
from .basic import BasicProtocol
from .etora import EtoraProtocol
from .mdart import MdartProtocol
from .terp import TerpProtocol

PROTOCOLS = {
    "basic": BasicProtocol,
    "etora": EtoraProtocol,
    "terp": TerpProtocol,
    "mdart": MdartProtocol,
}

PROTOCOL_NAMES = tuple(PROTOCOLS)


def make_protocol(name: str, net, engine, params=None, rng=None) -> RoutingProtocol:
    try:
        cls = PROTOCOLS[name]
    except KeyError:
        raise ValueError(
            f"unknown protocol {name!r}; valid: {'|'.join(PROTOCOL_NAMES)}"
        ) from None
    return cls(net, engine, params, rng)


__all__ = ["RoutingProtocol", "BasicProtocol", "EtoraProtocol", "TerpProtocol",
           "MdartProtocol", "PROTOCOLS", "PROTOCOL_NAMES", "make_protocol"]
