# recognition/updates.py
import logging

import numpy as np
from scipy.special import logsumexp

from classifiers.models import ClassDistribution
from .models import FLAG_ALL_ZERO, IcMode, TraceRecord, UpdateStatus

logger = logging.getLogger('recognition')


def _record(session, observation, status, grasp, z, flag=None):
    session.trace.append(TraceRecord(
        iteration=session.iteration,
        grasp=grasp,
        z=z,
        observation=tuple(float(x) for x in observation),
        state=tuple(float(x) for x in session.state()),
        predicted=status.predicted,
        certainty=status.certainty,
        converged=status.converged,
        flag=flag,
    ))


def ic_update(session, p, grasp=0, z=0):
    """
    Шаг итеративной классификации.

    ARGMAX_ONLY: s_i += p_i для i = argmax p (при равенстве - меньший индекс);
    FULL_ACCUMULATE: s += p. Сходимость, если ŝ_max > порога.

    Example:
        p = (0.7, 0.2, 0.1) на первой итерации -> s = (0.7, 0, 0), ŝ_max = 0.7
    """
    if not isinstance(p, ClassDistribution):
        p = ClassDistribution(p)
    if p.m != session.m:
        raise ValueError(f"Распределение на {p.m} классов, сессия на {session.m}")

    if session.mode is IcMode.ARGMAX_ONLY:
        session.scores[p.argmax] += p.max
    else:
        session.scores += p.probs
    session.iteration += 1

    certainty = session.certainty
    status = UpdateStatus(certainty > session.threshold, session.leader, certainty)
    _record(session, p.probs, status, grasp, z)
    logger.debug(f"IC {session.iteration}: p = {p}, s = {np.round(session.scores, 4).tolist()}, ŝ_max = {certainty:.4f}")
    return status


def bc_update(session, likelihoods, grasp=0, z=0, log_space=False):
    """
    Байесовский шаг p_i <- p_i * P(q | O_i), затем нормировка; вычисляется
    в логарифмах. Если все правдоподобия нулевые, шаг пропускается:
    апостериорное распределение не меняется, запись трассы помечается.

    Example:
        априорное (0.8, 0.2), правдоподобия (0.2, 0.8) -> (0.5, 0.5)
    """
    values = np.asarray(likelihoods, dtype=np.float64).ravel()
    if len(values) != session.m:
        raise ValueError(f"Правдоподобий {len(values)}, классов {session.m}")
    if log_space:
        if np.any(np.isnan(values)) or np.any(values == np.inf):
            raise ValueError(f"Логарифмы правдоподобий должны быть < +inf: {values.tolist()}")
        logs = values
    else:
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError(f"Правдоподобия должны быть конечными и неотрицательными: {values.tolist()}")
        with np.errstate(divide='ignore'):
            logs = np.log(values)

    session.iteration += 1
    updated = session.log_posterior + logs
    flag = None
    if not np.any(np.isfinite(updated)):
        session.skipped += 1
        flag = FLAG_ALL_ZERO
        logger.warning(f"BC {session.iteration}: все правдоподобия нулевые, обновление пропущено")
    else:
        session.log_posterior = updated - logsumexp(updated)

    certainty = session.certainty
    status = UpdateStatus(certainty > session.threshold, session.leader, certainty)
    _record(session, logs, status, grasp, z, flag)
    logger.debug(f"BC {session.iteration}: p = {np.round(session.posterior, 4).tolist()}")
    return status
