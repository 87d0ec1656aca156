import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# --- Worker Pool ---
# Default size of the thread pool used for evaluation and decoder samplers
THREADS = int(os.getenv("CLIQUE_THREADS", os.cpu_count() or 1))

# --- Logging ---
LOG_DIR = os.getenv("CLIQUE_LOG_DIR", "logs")
LOG_LEVEL = os.getenv("CLIQUE_LOG_LEVEL", "INFO")

# --- Artifacts ---
MANIFEST_FILE = "manifest.json"
CHECKPOINT_VERSION = 1
MANIFEST_VERSION = 1

# --- Exact Solver ---
# Graphs above this many nodes need an explicit override before the exact solver runs
EXACT_NODE_CAP = int(os.getenv("CLIQUE_EXACT_NODE_CAP", 200))
