import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project Root
BASE_DIR = os.path.dirname(os.path.abspath(__file__))

# Output Directories (created per run, not at import)
OUTPUT_DIR = os.getenv("ANTSYNTH_OUTPUT_DIR", os.path.join(BASE_DIR, "output"))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Webhook URL for run notifications (n8n, Slack relay, ...)
WEBHOOK_URL = os.getenv("ANTSYNTH_WEBHOOK_URL", "")

# Multithreading Configuration
ENABLE_MULTITHREADING = os.getenv("ENABLE_MULTITHREADING", "True").lower() == "true"
MAX_WORKERS = int(os.getenv("MAX_WORKERS", "5"))  # Number of threads for batch evaluation
PARALLEL_MIN_BATCH = int(os.getenv("PARALLEL_MIN_BATCH", "64"))  # Smaller batches run sequentially

# Experiment defaults
DEFAULT_NUM_ELEMENTS = 20
DEFAULT_SPACING_WAVELENGTHS = 0.5
DEFAULT_GRID_STEP_DEG = 0.25
DEFAULT_FLOOR_DB = -120.0
DEFAULT_ITERATIONS = 500
DEFAULT_MAIN_SECTOR = (82.0, 98.0)
DEFAULT_SLL_CEILING_DB = -20.0

# Fitness returned for an all-zero amplitude vector (dB * degrees)
ZERO_EXCITATION_FITNESS = 1e9

OPTIMIZERS = ("noabs", "pso", "ga")
