"""Next-day stock index forecasting with MLP, SVM, ANFIS and DBNN models."""

from ._stockcast import (
    Error,
    Model,
    anfis_rule_count,
    load_model,
    load_ohlc_csv,
    lsq_solve,
    map_metric,
    mape,
    pearson_corr,
    psd_check,
    rls_solve,
    rmse,
    run_experiment,
    synth_ohlc,
    train_anfis,
    train_dbnn,
    train_mlp,
    train_svc,
    train_svr,
    write_synth_csv,
)

__all__ = [
    "Error",
    "Model",
    "anfis_rule_count",
    "load_model",
    "load_ohlc_csv",
    "lsq_solve",
    "map_metric",
    "mape",
    "pearson_corr",
    "psd_check",
    "rls_solve",
    "rmse",
    "run_experiment",
    "synth_ohlc",
    "train_anfis",
    "train_dbnn",
    "train_mlp",
    "train_svc",
    "train_svr",
    "write_synth_csv",
]
