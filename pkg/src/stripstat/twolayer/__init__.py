"""Two-layer Schur (geometric) and Whittaker (log-gamma) measures."""
from ..params import GeoParams, LGParams
from .geo import (
    DOWN,
    RIGHT,
    GeoDoob,
    h_geo,
    kernel_geo,
    kernel_word_step_geo,
    limit_doob_geo,
    limit_kernel_geo,
    q_geo,
    sample_twolayer_geo,
    twolayer_logdensity_geo,
)
from .lg import (
    ChainConfig,
    ISResult,
    LGDoob,
    McmcResult,
    H_lg,
    Q_lg,
    Q_lg_grid,
    importance_sample_lg,
    kernel_lg,
    kernel_word_step_lg,
    limit_doob_lg,
    limit_kernel_lg,
    sample_twolayer_lg_mcmc,
    twolayer_logdensity_lg,
)
from .walks import pitman_geo, pitman_lg, walk_weight_geo, walk_weight_lg


def _model(model, params):
    m = str(model).upper()
    if m not in ("GEO", "LG"):
        raise ValueError("model must be 'GEO' or 'LG'")
    want = GeoParams if m == "GEO" else LGParams
    if not isinstance(params, want):
        raise TypeError(f"model {m} needs {want.__name__}")
    return m


def kernel_word_step(x, direction, lam, mu, params, model):
    if _model(model, params) == "GEO":
        return kernel_word_step_geo(x, direction, lam, mu, params)
    return kernel_word_step_lg(x, direction, lam, mu, params)


def limit_doob(model, l, params):
    if _model(model, params) == "GEO":
        return limit_doob_geo(l, params)
    return limit_doob_lg(l, params)


def limit_kernel(model, lam, mu, params):
    if _model(model, params) == "GEO":
        return limit_kernel_geo(lam, mu, params)
    return limit_kernel_lg(lam, mu, params)
