import json
import logging
import sys
import time
import traceback
from typing import Any, Dict, Optional, TextIO

from ..utils.exceptions import LarrError

logger = logging.getLogger(__name__)

UNEXPECTED_EXIT_CODE = 1


class CLIErrorHandler:
    """
    Centralized error handling for the command line
    """

    @staticmethod
    def _error_id(exc: Exception) -> str:
        return f"err_{int(time.time())}_{hash(str(exc)) % 10000:04d}"

    @staticmethod
    def _emit(report: Dict[str, Any], stream: TextIO):
        stream.write(json.dumps(report, indent=2, default=str) + "\n")
        stream.flush()

    @staticmethod
    def handle_larr_error(exc: LarrError, command: str, stream: Optional[TextIO] = None) -> int:
        """
        Report a known failure and return its exit code
        """
        error_id = CLIErrorHandler._error_id(exc)

        error_response = exc.to_dict()
        error_response.update({
            "timestamp": time.time(),
            "error_id": error_id,
            "command": command,
        })

        logger.error(f"{type(exc).__name__} {error_id}: {exc.message}")
        CLIErrorHandler._emit(error_response, stream or sys.stderr)
        return exc.exit_code

    @staticmethod
    def handle_general_error(exc: Exception, command: str, stream: Optional[TextIO] = None) -> int:
        """
        Report an unexpected failure; the full traceback goes to the log only
        """
        error_id = CLIErrorHandler._error_id(exc)

        error_response = {
            "error": "internal_error",
            "type": type(exc).__name__,
            "message": "An unexpected error occurred",
            "details": str(exc),
            "timestamp": time.time(),
            "error_id": error_id,
            "command": command,
        }

        # Log the full traceback for debugging
        logger.error(f"Internal error {error_id}: {str(exc)}\n{traceback.format_exc()}")
        CLIErrorHandler._emit(error_response, stream or sys.stderr)
        return UNEXPECTED_EXIT_CODE

    @staticmethod
    def handle(exc: Exception, command: str, stream: Optional[TextIO] = None) -> int:
        if isinstance(exc, LarrError):
            return CLIErrorHandler.handle_larr_error(exc, command, stream)
        return CLIErrorHandler.handle_general_error(exc, command, stream)
