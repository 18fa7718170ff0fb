from typing import Any, Dict, List, Optional
import logging

logger = logging.getLogger(__name__)


class ValidationHelper:
    """Helper functions for data validation"""

    @staticmethod
    def sanitize_string(value: Optional[str]) -> str:
        """Sanitize string input"""
        if not value:
            return ""
        return value.strip()

    @staticmethod
    def find_duplicates(values: List[Any]) -> List[Any]:
        """Return values occurring more than once, in first-seen order"""
        seen = set()
        duplicates = []
        for value in values:
            if value in seen and value not in duplicates:
                duplicates.append(value)
            seen.add(value)
        return duplicates


class LoggingHelper:
    """Helper functions for logging"""

    @staticmethod
    def log_cycle(timestamp: int, cluster_id: Optional[str] = None, **kwargs):
        """Log per-cycle evaluation details"""
        log_data: Dict[str, Any] = {"timestamp": timestamp}

        if cluster_id is not None:
            log_data["cluster"] = cluster_id

        log_data.update(kwargs)

        logger.info(f"Cycle: {log_data}")

    @staticmethod
    def log_error(error: Exception, context: str = "", **kwargs):
        """Log error with context"""
        log_data = {
            "error": str(error),
            "error_type": type(error).__name__,
            "context": context,
        }

        details = getattr(error, "context", None)
        if details:
            log_data["details"] = details

        log_data.update(kwargs)

        logger.error(f"Error: {log_data}")
