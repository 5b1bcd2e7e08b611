"""repzeta: exact desk-scale experiments with commutator word maps,
representation zeta special values, graph degenerations of classical Lie
algebras, and p-adic monomial pushforwards."""

__version__ = "0.1.0"
