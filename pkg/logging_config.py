import logging
import os

import config

# --- Log Directory ---
LOG_DIR = config.LOG_DIR
if not os.path.exists(LOG_DIR):
    os.makedirs(LOG_DIR)

# --- Log File Paths ---
ERROR_LOG_FILE = os.path.join(LOG_DIR, "errors.log")
TRAIN_LOG_FILE = os.path.join(LOG_DIR, "train.log")
EVAL_LOG_FILE = os.path.join(LOG_DIR, "eval.log")


def _channel_logger(name: str, path: str) -> logging.Logger:
    channel = logging.getLogger(name)
    channel.setLevel(logging.INFO)
    channel.propagate = False  # Keep channel records out of errors.log
    if not channel.handlers:
        handler = logging.FileHandler(path)
        handler.setFormatter(logging.Formatter("%(asctime)s - %(message)s"))
        channel.addHandler(handler)
    return channel


def setup_logging():
    """Configures the logging system for the application."""

    # --- Root Logger Configuration (General Logs & Unhandled Exceptions) ---
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(ERROR_LOG_FILE),
            logging.StreamHandler(),  # Also print to console
        ],
    )

    # --- Train Logger (per-epoch losses, checkpoint events) ---
    train_logger = _channel_logger("TrainLogger", TRAIN_LOG_FILE)

    # --- Eval Logger (per-graph predictions and timings) ---
    eval_logger = _channel_logger("EvalLogger", EVAL_LOG_FILE)

    return logging.getLogger(), train_logger, eval_logger


# Initialize the loggers
logger, train_logger, eval_logger = setup_logging()
