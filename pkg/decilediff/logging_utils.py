import sys
import logging

ANSI_RESET = "\033[0m"


def _isatty(stream) -> bool:
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


class MultiplexingHandler(logging.Handler):
    """Routes records at or below split_level to the info stream (stdout) and the rest to the error stream (stderr).

    Unset streams resolve to the current sys.stdout/sys.stderr on every record, so redirection after
    set-up is honoured.
    """
    def __init__(self, info_stream=None, err_stream=None, split_level=logging.INFO):
        super().__init__()
        self.info_stream = info_stream
        self.err_stream = err_stream
        self.split_level = split_level

    def stream_for(self, record):
        if record.levelno > self.split_level:
            return self.err_stream or sys.stderr
        return self.info_stream or sys.stdout

    def emit(self, record):
        stream = self.stream_for(record)
        try:
            text = self.format(record)
            if isinstance(self.formatter, ColorizingFormatter) and _isatty(stream):
                text = self.formatter.colorize(text, record.levelno)
            stream.write(text + "\n")
            stream.flush()
        except BrokenPipeError:
            # reader has gone away, e.g. output piped into head
            pass
        except Exception:
            self.handleError(record)


class ColorizingFormatter(logging.Formatter):
    """Formatter that can wrap a formatted record in the ANSI style of its severity"""
    def __init__(self, fmt=None, datefmt=None, style="%",
                 error_style="\033[91m", warning_style="\033[93m", debug_style="\033[2m"):
        super().__init__(fmt, datefmt, style)
        self.error_style = error_style
        self.warning_style = warning_style
        self.debug_style = debug_style

    def style_for(self, levelno: int) -> str:
        if levelno >= logging.ERROR:
            return self.error_style
        if levelno >= logging.WARNING:
            return self.warning_style
        if levelno <= logging.DEBUG:
            return self.debug_style
        return ""

    def colorize(self, text: str, levelno: int) -> str:
        style = self.style_for(levelno)
        return f"{style}{text}{ANSI_RESET}" if style else text
