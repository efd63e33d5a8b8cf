"""GCN victim training and the black-box query interface."""

from ga2c.victim.gcn import GCNModel, gcn_forward
from ga2c.victim.handle import VictimHandle, load_victim, save_victim, train_victim
from ga2c.victim.oracle import BlackBoxOracle, seal

__all__ = [
    "BlackBoxOracle",
    "GCNModel",
    "VictimHandle",
    "gcn_forward",
    "load_victim",
    "save_victim",
    "seal",
    "train_victim",
]
