import os
from dotenv import load_dotenv

# Load environment variables from .env file in parent directory
dotenv_path = os.path.join(os.path.dirname(os.path.dirname(__file__)), '.env')
load_dotenv(dotenv_path)

# Load environment variables from .env file in utils directory as fallback
utils_dotenv_path = os.path.join(os.path.dirname(__file__), '.env')
if os.path.exists(utils_dotenv_path):
    load_dotenv(utils_dotenv_path)

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class Settings:
    def __init__(self):
        # Runtime knobs; none of them changes an output byte
        self.LOG_LEVEL = os.getenv("MAPWORK_LOG_LEVEL", "INFO").upper()
        self.DEFAULT_JOBS = int(os.getenv("MAPWORK_JOBS", "1"))
        self.CENSUS_CHUNK = int(os.getenv("MAPWORK_CENSUS_CHUNK", "1024"))

        # Paths
        self.DATA_DIR = os.getenv("MAPWORK_DATA_DIR", os.path.join(REPO_ROOT, "data"))
        self.GOLDEN_PATH = os.getenv(
            "MAPWORK_GOLDEN_PATH", os.path.join(self.DATA_DIR, "golden_tables.json")
        )

        # Published counts
        self.EXPECTED_M33 = 23
        self.EXPECTED_M446 = 40
        self.EXPECTED_PAIRS = 18
        self.EXPECTED_SINGLETONS = 4
        self.EXPECTED_FORKS = 14
        self.EXPECTED_FACES = frozenset({7, 9})
        self.EXPECTED_GENUS = frozenset({17, 18})

        # Edge-count conventions used by the genus table
        self.EDGE_CONVENTIONS = ("white", "black", "max-per-pair", "mean", "simple")

        # Default reduction rules
        self.WHITE_RULE = "runs-period"
        self.BLACK_RULE = "reduced-multiplicity"

# Create a singleton instance
settings = Settings()
