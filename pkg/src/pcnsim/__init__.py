"""pcnsim: deterministic discrete-event simulator for payment-channel-network
routing protocols, with the classification catalog and benchmark scenarios.
"""

__version__ = "0.1.0"
