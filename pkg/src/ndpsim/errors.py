"""Exception hierarchy shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""


class NonCanonicalAddress(SimError):
    """Virtual address whose bits 48..63 do not sign-extend bit 47."""


class IndexOutOfRange(SimError):
    """Index field outside the range allowed by its scheme."""


class PageNotMapped(SimError):
    """Page table walk hit an invalid entry."""

    def __init__(self, va: int, level: str):
        super().__init__(f"va {va:#x} not mapped (invalid entry at {level})")
        self.va = va
        self.level = level


class OutOfPhysicalMemory(SimError):
    """Frame allocator exhausted."""


class AddressOutOfPhysicalRange(SimError):
    """Physical address beyond the configured memory size."""


class ParseError(SimError):
    """Malformed trace line."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidSpec(SimError):
    """Invalid trace generator parameters."""


class ConfigError(SimError):
    """Invalid or inconsistent simulation configuration."""


class ConfigMismatch(SimError):
    """Configs in a comparison disagree on shared parameters."""
