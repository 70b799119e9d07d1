"""Stateful-priority synthesis for networks of discrete automata.

Given a network model and an error formula, the package locates all
reachable preError states through bounded model checking with an external
SMT solver, synthesizes stateful priorities from them, and rewrites the
network with positional-variable guards so the error becomes unreachable
while safe behavior is untouched.
"""

__version__ = "0.1.0"
