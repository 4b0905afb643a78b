"""
Greedy Deletions Simulator
Seedable Greedy[d] balls-into-bins engine with random deletions and its
acceptance harness
"""

import sys
import logging
from datetime import datetime
from pathlib import Path

# Setup Python path for package imports
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from cli.commands import build_parser, run_command
from utils.helpers import get_data_path
from utils.log_manager import LOG_MESSAGES


# ============== Logging setup ==============
def setup_logging(verbose: bool = False, to_file: bool = True, log_dir: Path = None):
    """Initialize logging system"""
    handlers = [logging.StreamHandler()]
    if to_file:
        log_dir = Path(log_dir) if log_dir is not None else get_data_path() / "logs"
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"greedy_sim_{datetime.now().strftime('%Y%m%d')}.log"
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s [%(levelname)s] %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=handlers
    )

    return logging.getLogger('GreedySim')


def main():
    args = build_parser().parse_args()
    logger = setup_logging(verbose=args.verbose, to_file=not args.no_log_file)
    logger.info(LOG_MESSAGES["program_started"].format(args.command))

    code = run_command(args)

    logger.info(LOG_MESSAGES["program_closed"].format(code))
    sys.exit(code)


if __name__ == "__main__":
    main()
