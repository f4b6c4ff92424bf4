"""Embedded low-storage Runge-Kutta pairs with PID step size control."""

from ._lsrk import (
    EmptyStableSetError,
    IntegrationAborted,
    butcher,
    catalog,
    default_gains,
    export_coefficients,
    integrate,
    integrate_ode,
    limiter,
    max_order_residual,
    orders,
    parse_coefficients,
    pid_factor,
    problems,
    search,
    stability,
)

__all__ = [
    "EmptyStableSetError",
    "IntegrationAborted",
    "butcher",
    "catalog",
    "default_gains",
    "export_coefficients",
    "integrate",
    "integrate_ode",
    "limiter",
    "max_order_residual",
    "orders",
    "parse_coefficients",
    "pid_factor",
    "problems",
    "search",
    "stability",
]
