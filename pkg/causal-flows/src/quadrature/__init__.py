from src.quadrature.clenshaw_curtis import (
    QuadratureRule,
    clenshaw_curtis,
    integrate,
    nodes_on_interval,
)
