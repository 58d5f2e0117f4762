"""Electronic-nose toolkit: simulated MOS sensor arrays, 7-Z-5 log-sigmoid
networks trained by backpropagation with momentum, table-driven inference,
a line protocol for acquisition boards, and false-positive evaluation."""

__version__ = "0.1.0"
