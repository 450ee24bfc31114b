"""Exception hierarchy for the toolkit."""


class LayoutKitError(Exception):
    """Base class for all toolkit errors."""


class UnknownClass(LayoutKitError):
    def __init__(self, name):
        super().__init__(f"unknown layout class: {name!r}")
        self.name = name


class MalformedLine(LayoutKitError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class OutOfRange(LayoutKitError):
    def __init__(self, line_no: int, value: float):
        super().__init__(f"line {line_no}: normalized value {value} outside [0, 1]")
        self.line_no = line_no
        self.value = value


class SchemaError(LayoutKitError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path


class DuplicatePage(LayoutKitError):
    def __init__(self, page_id: str):
        super().__init__(f"duplicate page_id: {page_id!r}")
        self.page_id = page_id


class PageMismatch(LayoutKitError):
    def __init__(self, page_id: str):
        super().__init__(f"detections reference unknown page: {page_id!r}")
        self.page_id = page_id


class NoGroundTruth(LayoutKitError):
    def __init__(self):
        super().__init__("dataset contains no ground-truth annotations")


class UnroutedClass(LayoutKitError):
    def __init__(self, class_name: str):
        super().__init__(f"no extraction backend (and no skip marker) for class {class_name!r}")
        self.class_name = class_name


class BackendError(LayoutKitError):
    """Base for extraction backend failures; non-fatal per page unless strict."""


class BackendTimeout(BackendError):
    def __init__(self, component: str, timeout: float):
        super().__init__(f"{component}: backend timed out after {timeout}s")
        self.component = component


class BackendCrash(BackendError):
    def __init__(self, component: str, exit_code: int, stderr: str = ""):
        msg = f"{component}: backend exited with code {exit_code}"
        if stderr:
            msg += f" ({stderr.strip()[:200]})"
        super().__init__(msg)
        self.component = component
        self.exit_code = exit_code


class MalformedBackendOutput(BackendError):
    def __init__(self, component: str, reason: str):
        super().__init__(f"{component}: malformed backend output: {reason}")
        self.component = component
