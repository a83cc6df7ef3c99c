from .forest import RandomForestModel, train_random_forest
from .gbm import GbmModel, train_gbm
from .logistic import LogisticModel, logistic_loss_and_grad, sigmoid, train_logistic
from .stack import (
    BaseLearner,
    StackConfig,
    StackEnsembleModel,
    predict_stack,
    stratified_folds,
    train_stack,
)
from .svm import LinearSvmModel, train_linear_svm
from .tree import DecisionTree

__all__ = [
    "BaseLearner", "DecisionTree", "GbmModel", "LinearSvmModel", "LogisticModel",
    "RandomForestModel", "StackConfig", "StackEnsembleModel", "logistic_loss_and_grad",
    "predict_stack", "sigmoid", "stratified_folds", "train_gbm", "train_linear_svm",
    "train_logistic", "train_random_forest", "train_stack",
]
