"""
Espectros parciales por complemento de Schur.

Incluye la ruta directa (complemento de Schur del bloque de covariables), la
ruta rápida por inversa de la matriz espectral completa, el espectro del
núcleo de predicción y la corrección de sesgo M / (M - P_Z).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from apps.partialk.exceptions import ConfigurationError, DomainError, NumericalError, UsageError
from apps.partialk.services.spectral_service import SpectralMatrixField, symmetrize

logger = logging.getLogger(__name__)


class SingularMatrixError(NumericalError):
    """Bloque espectral mal condicionado en algún nodo de la rejilla."""
    pass


@dataclass(frozen=True)
class PartialSpec:
    """
    Procesos de interés y covariables de un espectro parcial.

    Atributos:
        targets: tipos de interés (X o X, Y; se admiten más para parciales encadenados).
        covariates: tipos parcializados, en orden.
        debias: aplicar el factor M / (M - P_Z).
    """
    targets: Tuple[str, ...]
    covariates: Tuple[str, ...] = ()
    debias: bool = True

    def __post_init__(self):
        targets = tuple(dict.fromkeys(str(t) for t in self.targets))
        covariates = tuple(str(z) for z in self.covariates)
        if not targets:
            raise UsageError("Se requiere al menos un tipo objetivo.")
        if len(set(covariates)) != len(covariates):
            raise UsageError(f"Covariables repetidas: {list(covariates)}")
        overlap = set(targets) & set(covariates)
        if overlap:
            raise UsageError(f"Objetivos y covariables deben ser disjuntos; comunes: {sorted(overlap)}")
        object.__setattr__(self, 'targets', targets)
        object.__setattr__(self, 'covariates', covariates)

    @property
    def n_covariates(self) -> int:
        return len(self.covariates)

    def validate(self, labels: Sequence[str]) -> None:
        missing = [label for label in self.targets + self.covariates if label not in labels]
        if missing:
            raise UsageError(f"Tipos ausentes del registro {list(labels)}: {missing}")

    def debias_factor(self, n_tapers: int) -> float:
        """M / (M - P_Z) si corresponde; 1 sin covariables o sin corrección."""
        if not self.debias or not self.covariates:
            return 1.0
        if n_tapers <= self.n_covariates:
            raise ConfigurationError(
                f"La corrección de sesgo requiere M > P_Z (M={n_tapers}, P_Z={self.n_covariates})."
            )
        return n_tapers / (n_tapers - self.n_covariates)


# =============================================================================
# AUXILIARES
# =============================================================================

def _check_conditioning(block: np.ndarray, field: SpectralMatrixField, what: str, limit: Optional[float] = None) -> None:
    """Lanza SingularMatrixError con el primer nodo cuyo número de condición supera el límite."""
    if block.shape[-1] == 0:
        return
    limit = limit if limit is not None else getattr(settings, 'PARTIALK_CONDITION_LIMIT', 1e12)
    with np.errstate(divide='ignore', invalid='ignore'):
        condition = np.linalg.cond(block)
    bad = ~np.isfinite(condition) | (condition > limit)
    if np.any(bad):
        flat = int(np.flatnonzero(bad.reshape(-1))[0])
        node = field.grid.node_at(flat)
        value = condition.reshape(-1)[flat]
        logger.error(f"Bloque {what} singular en k={node} (cond={value:.3g})")
        raise SingularMatrixError(
            f"El bloque {what} es singular en el nodo k={node}: número de condición {value:.3g} > {limit:.3g}"
        )


def _partial_field(field: SpectralMatrixField, spec: PartialSpec, values: np.ndarray, route: str) -> SpectralMatrixField:
    factor = spec.debias_factor(field.n_tapers)
    values = symmetrize(values * factor)
    logger.debug(f"Espectro parcial ({route}): objetivos {spec.targets}, covariables {spec.covariates}, factor {factor:.6g}")
    return SpectralMatrixField(
        grid=field.grid,
        labels=spec.targets,
        values=values,
        n_tapers=field.n_tapers,
        covariates=field.covariates + spec.covariates,
        debias_factor=field.debias_factor * factor,
        metadata={**field.metadata, 'route': route},
    )


# =============================================================================
# SERVICIO
# =============================================================================

class PartialService:
    """
    Servicio de espectros parciales.

    Responsabilidades:
    - Complemento de Schur f_TT - f_TZ f_ZZ^{-1} f_ZT por nodo.
    - Fórmulas rápidas a partir de g = f^{-1}.
    - Núcleo de predicción f_XZ f_ZZ^{-1}.
    - Validación Monte-Carlo de la constante de corrección de sesgo.
    """

    @staticmethod
    def prediction_kernel_spectrum(field: SpectralMatrixField, x: str, covariates: Sequence[str]) -> np.ndarray:
        """
        a(k) = f_XZ(k) f_ZZ(k)^{-1} por nodo.

        Returns:
            Arreglo complejo (*grid.shape, P_Z).

        Raises:
            SingularMatrixError: f_ZZ mal condicionada en algún nodo.
        """
        covariates = tuple(covariates)
        f_zz = field.block(covariates, covariates)
        f_zx = field.block(covariates, (x,))
        _check_conditioning(f_zz, field, 'f_ZZ')
        # f_ZZ hermítica: (f_ZZ^{-1} f_ZX)^H = f_XZ f_ZZ^{-1}
        solved = np.linalg.solve(f_zz, f_zx)[..., 0]
        return np.conj(solved)

    @staticmethod
    def partial_matrix_schur(field: SpectralMatrixField, spec: PartialSpec) -> SpectralMatrixField:
        """
        Complemento de Schur del bloque de covariables sobre los objetivos.

        Sin covariables devuelve el bloque de objetivos sin cambios.

        Raises:
            SingularMatrixError: f_ZZ mal condicionada.
            ConfigurationError: M <= P_Z con corrección de sesgo.
        """
        spec.validate(field.labels)
        spec.debias_factor(field.n_tapers)
        f_tt = field.block(spec.targets, spec.targets)
        if not spec.covariates:
            return _partial_field(field, spec, f_tt.copy(), 'schur')

        f_zz = field.block(spec.covariates, spec.covariates)
        f_tz = field.block(spec.targets, spec.covariates)
        f_zt = field.block(spec.covariates, spec.targets)
        _check_conditioning(f_zz, field, 'f_ZZ')
        values = f_tt - f_tz @ np.linalg.solve(f_zz, f_zt)
        return _partial_field(field, spec, values, 'schur')

    @staticmethod
    def partial_matrix_fast(field: SpectralMatrixField, spec: PartialSpec) -> SpectralMatrixField:
        """
        Misma salida que ``partial_matrix_schur`` a partir de g = f^{-1}.

        Con un objetivo f_XX.Z = 1 / g_XX; con dos,
        f_XY.Z = -g_XY / (g_XX g_YY - |g_XY|^2) y f_XX.Z = g_YY / det.
        """
        spec.validate(field.labels)
        spec.debias_factor(field.n_tapers)
        if not spec.covariates:
            return _partial_field(field, spec, field.block(spec.targets, spec.targets).copy(), 'fast')

        _check_conditioning(field.block(spec.covariates, spec.covariates), field, 'f_ZZ')
        involved = spec.targets + spec.covariates
        f = field.block(involved, involved)
        try:
            g = np.linalg.inv(f)
        except np.linalg.LinAlgError:
            raise SingularMatrixError(
                "La matriz de objetivos y covariables no es invertible; use la ruta 'schur'."
            ) from None

        t = len(spec.targets)
        if t == 1:
            values = 1.0 / g[..., :1, :1]
        elif t > 2:
            values = np.linalg.inv(g[..., :t, :t])
        else:
            gxx = g[..., 0, 0].real
            gyy = g[..., 1, 1].real
            gxy = g[..., 0, 1]
            det = gxx * gyy - np.abs(gxy) ** 2
            values = np.empty(f.shape[:-2] + (2, 2), dtype=complex)
            values[..., 0, 0] = gyy / det
            values[..., 1, 1] = gxx / det
            values[..., 0, 1] = -gxy / det
            values[..., 1, 0] = -np.conj(gxy) / det
        return _partial_field(field, spec, values, 'fast')

    @staticmethod
    def wishart_debias_check(
        M: int,
        P: int,
        s: int,
        sigma: np.ndarray,
        n_draws: int,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """
        Media Monte-Carlo del complemento de Schur de W ~ Wishart_C(M, Sigma/M)
        dividida por Sigma_{11.2}.

        El valor esperado es (M - P + s) / M en cada entrada del bloque s x s.
        Las entradas donde Sigma_{11.2} se anula reciben la razón de trazas.

        Raises:
            DomainError: Sigma no definida positiva o dimensiones inválidas.
        """
        sigma = np.asarray(sigma, dtype=complex)
        if sigma.shape != (P, P):
            raise DomainError(f"Sigma debe ser {P}x{P}, no {sigma.shape}.")
        if not 1 <= s <= P:
            raise DomainError(f"Tamaño de bloque s={s} fuera de [1, {P}].")
        if M <= P - s:
            raise DomainError(f"Se requiere M > P - s (M={M}, P={P}, s={s}).")
        if not np.allclose(sigma, sigma.conj().T):
            raise DomainError("Sigma debe ser hermítica.")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise DomainError("Sigma no es definida positiva.") from None

        def schur(matrix: np.ndarray) -> np.ndarray:
            if s == P:
                return matrix
            a = matrix[..., :s, :s]
            b = matrix[..., :s, s:]
            c = matrix[..., s:, :s]
            d = matrix[..., s:, s:]
            return a - b @ np.linalg.solve(d, c)

        # Filas z ~ CN(0, Sigma / M): W = sum_m z_m z_m^H
        noise = (rng.standard_normal((n_draws, M, P)) + 1j * rng.standard_normal((n_draws, M, P))) / np.sqrt(2 * M)
        z = noise @ chol.T
        wishart = np.einsum('nmp,nmq->npq', z, np.conj(z))
        mean = schur(wishart).mean(axis=0)
        reference = schur(sigma)
        nonzero = np.abs(reference) > 1e-12 * np.max(np.abs(reference))
        ratio = np.full(reference.shape, float(np.trace(mean).real / np.trace(reference).real))
        ratio[nonzero] = (mean[nonzero] / reference[nonzero]).real
        logger.debug(f"Chequeo Wishart M={M}, P={P}, s={s}: razón media {ratio.mean():.4f}")
        return ratio
