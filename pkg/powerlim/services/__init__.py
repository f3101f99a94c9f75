from . import expflow, graded, jordan, matcore, oracle, yamamoto

__all__ = ["expflow", "graded", "jordan", "matcore", "oracle", "yamamoto"]
