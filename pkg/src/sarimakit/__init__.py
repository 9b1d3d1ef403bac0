"""Seasonal ARIMA toolkit: identification, estimation, diagnostics and forecasting."""

from .errors import (AlignmentError, ArgumentError, ConvergenceError, DataError, DomainError,
                     NoAdmissibleModel, NumericError, SarimaError, ValidityError)
from .series import (TimeSeries, TransformRecord, apply_differences, box_cox, difference,
                     estimate_lambda, integrate, inv_box_cox, read_csv, write_csv)
from .correlogram import Correlogram, acf, pacf
from .stattests import TestReport, adf_test, ljung_box, mcleod_li, shapiro_wilk
from .sarima import CoefficientSet, ModelSpec, simulate
from .estimate import FittedModel, fit
from .forecasting import ForecastSet, HoldoutLedger, forecast, mape, one_step_holdout, psi_weights
from .selection import apply_gates, enumerate_candidates, rank_by_aic, select_model

__version__ = "0.1.0"
