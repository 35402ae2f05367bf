"""logpot CLI commands.

One module per command family; ``cli`` wraps each ``*_command`` function.
"""

__all__ = [
    "capacity_command",
    "leja_command",
    "green_command",
    "bergman_command",
    "ratio_command",
    "lambda_star_command",
    "build_map_command",
    "bw_rate_command",
    "reproduce_command",
]

from logpot.commands.bergman import bergman_command, ratio_command
from logpot.commands.bw_rate import bw_rate_command
from logpot.commands.capacity import capacity_command, leja_command
from logpot.commands.criteria import build_map_command, lambda_star_command
from logpot.commands.green import green_command
from logpot.commands.reproduce import reproduce_command
