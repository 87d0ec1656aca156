import sys

from clique.harness import cli
from logging_config import logger


def main():
    logger.info("--- clique CLI started ---")
    return cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
