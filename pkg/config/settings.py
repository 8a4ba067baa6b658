"""Process settings for the surveillance toolkit."""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(BASE_DIR / '.env')

# Where `surveil run` writes artifacts when neither the config nor --out names a directory
OUTPUT_DIR = Path(os.environ.get('SURVEIL_OUTPUT_DIR', 'results'))

LOG_LEVEL = os.environ.get('SURVEIL_LOG_LEVEL', 'INFO').upper()

# Thread pool size for sweep points
WORKERS = max(1, int(os.environ.get('SURVEIL_WORKERS', '1')))

# Monte Carlo trials per coverage point when a config does not say
DEFAULT_TRIALS = int(os.environ.get('SURVEIL_DEFAULT_TRIALS', '20000'))

# Fade trials per A2G sweep point
DEFAULT_FADE_TRIALS = int(os.environ.get('SURVEIL_FADE_TRIALS', '10000'))

# Long-running acceptance checks only run when this is set
RUN_ACCEPTANCE = os.environ.get('SURVEIL_ACCEPTANCE', '').lower() in ('true', '1', 'yes')
