"""
Jerarquía de errores del paquete.

Cada servicio declara sus propias excepciones derivadas de estas clases base;
los comandos de gestión traducen la familia a un código de salida estable.
"""


class PartialKError(Exception):
    """Error base de la estimación de la función K parcial."""
    exit_code = 1


class UsageError(PartialKError):
    """Datos o configuración inválidos provistos por el usuario."""
    exit_code = 2


class UnsupportedError(PartialKError):
    """Estadístico válido pero sin procedimiento soportado."""
    exit_code = 3


class NumericalError(PartialKError):
    """Fallo numérico (singularidad, asimetría, cuadratura, recursos)."""
    exit_code = 4


class DomainError(UsageError):
    """Argumento fuera del dominio de la operación."""
    pass


class ConfigurationError(UsageError):
    """Combinación de hiperparámetros inconsistente."""
    pass


class ShapeError(UsageError):
    """Dimensiones de arreglos incompatibles."""
    pass


class ResourceError(NumericalError):
    """Se excedió un límite de tamaño o la cota de simulación."""
    pass
