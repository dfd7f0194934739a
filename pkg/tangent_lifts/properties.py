"""Typed, validated descriptors for configuration sections.

A Section declares its keys as class attributes:

    class SamplingConfig(Section):
        seed = Integer(min_value=0, default=42)
        box = ListOf(ListOf(float, length=2))

Assignment coerces (JSON ints widen to float, command-line strings parse)
and checks the value; a bad value raises ConfigError naming the key.
"""

from typing import Any, Dict, Generic, List, Optional, Sequence, TypeVar, Union, overload

from .errors import ConfigError

T = TypeVar("T")

_TRUE_STRINGS = ("true", "1", "yes", "on")
_FALSE_STRINGS = ("false", "0", "no", "off")


def _coerce_scalar(name: str, value: Any, target: type) -> Any:
    """Coerce CLI strings to int/float/bool, and JSON ints to float."""
    if isinstance(value, bool):
        if target is bool:
            return value
        raise ConfigError(f"{name} must be of type {target.__name__}, got {value!r}")
    if isinstance(value, target):
        return value
    if target is float and isinstance(value, int):
        return float(value)
    if isinstance(value, str) and target is bool:
        lowered = value.lower()
        if lowered in _TRUE_STRINGS or lowered in _FALSE_STRINGS:
            return lowered in _TRUE_STRINGS
    elif isinstance(value, str) and target in (int, float):
        try:
            return target(value)
        except ValueError:
            pass
    raise ConfigError(f"{name} must be of type {target.__name__}, got {value!r}")


class Property(Generic[T]):
    """One key of a configuration section.

    Subclasses override coerce() to convert raw JSON or command-line input
    and check() to reject values outside the allowed range. None always
    means "not set" and reads back as the default.
    """

    def __init__(self, default: Optional[T] = None):
        self.name = ""
        self.default = default

    def __set_name__(self, owner: type, name: str) -> None:
        self.name = name

    @property
    def _slot(self) -> str:
        return f"_cfg_{self.name}"

    @overload
    def __get__(self, obj: None, objtype: Optional[type]) -> "Property[T]": ...

    @overload
    def __get__(self, obj: object, objtype: Optional[type]) -> Optional[T]: ...

    def __get__(self, obj, objtype=None):
        if obj is None:
            return self
        return obj.__dict__.get(self._slot, self.default)

    def __set__(self, obj, value):
        if value is not None:
            value = self.coerce(value)
            self.check(value)
        obj.__dict__[self._slot] = value

    def coerce(self, value: Any) -> T:
        return value

    def check(self, value: T) -> None:
        pass


class _Scalar(Property[T]):
    target: type = object

    def coerce(self, value: Any) -> T:
        return _coerce_scalar(self.name, value, self.target)


class String(_Scalar[str]):
    target = str

    def __init__(
        self,
        min_length: Optional[int] = None,
        max_length: Optional[int] = None,
        default: Optional[str] = None,
    ):
        super().__init__(default)
        self.min_length = min_length
        self.max_length = max_length

    def check(self, value: str) -> None:
        if self.min_length is not None and len(value) < self.min_length:
            raise ConfigError(f"{self.name} needs at least {self.min_length} characters, got {value!r}")
        if self.max_length is not None and len(value) > self.max_length:
            raise ConfigError(f"{self.name} allows at most {self.max_length} characters, got {value!r}")


class Choice(_Scalar[str]):
    """String restricted to a fixed set of options."""

    target = str

    def __init__(self, options: Sequence[str], default: Optional[str] = None):
        super().__init__(default)
        self.options = tuple(options)

    def check(self, value: str) -> None:
        if value not in self.options:
            raise ConfigError(f"{self.name} must be one of {', '.join(self.options)}, got {value!r}")


class _Number(_Scalar[T]):
    def __init__(
        self,
        min_value: Optional[float] = None,
        max_value: Optional[float] = None,
        default: Optional[T] = None,
        exclusive_min: bool = False,
    ):
        super().__init__(default)
        self.min_value = min_value
        self.max_value = max_value
        self.exclusive_min = exclusive_min

    def check(self, value) -> None:
        if self.min_value is not None:
            if value < self.min_value or (self.exclusive_min and value == self.min_value):
                bound = ">" if self.exclusive_min else ">="
                raise ConfigError(f"{self.name} must be {bound} {self.min_value}, got {value!r}")
        if self.max_value is not None and value > self.max_value:
            raise ConfigError(f"{self.name} must be <= {self.max_value}, got {value!r}")


class Integer(_Number[int]):
    target = int


class Float(_Number[float]):
    target = float


class Boolean(_Scalar[bool]):
    target = bool


class ListOf(Property[list]):
    """List whose items are coerced to item_type.

    item_type may itself be a ListOf for nested arrays (a metric is
    ListOf(ListOf(str))); object leaves items untouched.
    """

    def __init__(
        self,
        item_type: Union[type, "ListOf"] = object,
        length: Optional[int] = None,
        default: Optional[list] = None,
    ):
        super().__init__(default)
        self.item_type = item_type
        self.length = length

    def coerce(self, value: Any) -> List[Any]:
        if isinstance(value, tuple):
            value = list(value)
        if not isinstance(value, list):
            raise ConfigError(f"{self.name} must be a list, got {type(value).__name__}")
        if self.length is not None and len(value) != self.length:
            raise ConfigError(f"{self.name} must have {self.length} items, got {len(value)}")
        return [self._item(v) for v in value]

    def _item(self, v: Any) -> Any:
        if isinstance(self.item_type, ListOf):
            self.item_type.name = self.name
            return self.item_type.coerce(v)
        if self.item_type in (int, float, bool, str):
            return _coerce_scalar(self.name, v, self.item_type)
        return v


class MappingOf(Property[dict]):
    """Mapping from string keys to values coerced to value_type."""

    def __init__(self, value_type: type = object, default: Optional[dict] = None):
        super().__init__(default)
        self.value_type = value_type

    def coerce(self, value: Any) -> Dict[str, Any]:
        if not isinstance(value, dict):
            raise ConfigError(f"{self.name} must be a mapping, got {type(value).__name__}")
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise ConfigError(f"{self.name} keys must be strings, got {k!r}")
            if self.value_type in (int, float, bool, str):
                v = _coerce_scalar(f"{self.name}.{k}", v, self.value_type)
            out[k] = v
        return out
