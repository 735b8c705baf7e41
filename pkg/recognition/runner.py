# recognition/runner.py
"""
Циклы распознавания: захват -> вектор -> классификатор -> обновление
сессии, пока уверенность не превысит порог или не кончится бюджет
физических захватов.
"""
import logging
import math

from classifiers.predictors import log_likelihoods, predict
from graspid.conf import get_setting
from graspid.exceptions import MetadataMismatch
from graspid.rng import derive_rng
from grasp_param.exceptions import DegenerateGrasp
from grasp_param.parameterization import vectorize
from sampling.sampler import sample_z_combinations
from .exceptions import MissingModelForZ, SamplerExhausted
from .models import (
    FLAG_DEGENERATE, FLAG_PRIOR, BcSession, IcMode, IcSession, Method, PriorSource,
    RecognitionResult, TraceRecord, UpdateStatus,
)
from .signals import recognition_finished
from .updates import bc_update, ic_update

logger = logging.getLogger('recognition')

STREAM_QUERY = 5
STREAM_COMBINATIONS = 6


def _check_models(models):
    names = None
    for z, model in models.items():
        if model.shape.n != z:
            raise MetadataMismatch(f"Модель для z = {z} обучена на n = {model.shape.n}")
        if names is not None and tuple(model.class_names) != names:
            raise MetadataMismatch(f"Классы моделей не совпадают: {model.class_names} != {names}")
        names = tuple(model.class_names)
    if names is None:
        raise ValueError("Не задано ни одной модели")
    return names


def _session(method, m, threshold):
    if method.bayesian:
        return BcSession(m, threshold, method.prior)
    return IcSession(m, threshold, method.ic_mode)


def _append(session, grasp, z, observation, flag):
    session.trace.append(TraceRecord(
        iteration=session.iteration,
        grasp=grasp,
        z=z,
        observation=tuple(float(x) for x in observation),
        state=tuple(float(x) for x in session.state()),
        predicted=session.leader,
        certainty=session.certainty,
        converged=False,
        flag=flag,
    ))


def _set_prior(session, auxiliary, grasp):
    """IP: априорное распределение по первому захвату; сам захват в обновления не входит."""
    part = grasp if grasp.n == auxiliary.shape.n else grasp.subset(range(auxiliary.shape.n))
    prior = predict(auxiliary, vectorize(part, auxiliary.shape)).probs
    session.set_prior(prior)
    _append(session, 0, part.n, prior, FLAG_PRIOR)
    logger.debug(f"Априорное распределение IP: {prior.round(4).tolist()}")
    return prior


def _apply(session, method, model, vector, grasp, z):
    if method.bayesian:
        return bc_update(session, log_likelihoods(model, vector)[0], grasp=grasp, z=z, log_space=True)
    return ic_update(session, predict(model, vector), grasp=grasp, z=z)


def _run(method, sampler, models, threshold=None, max_iterations=None, auxiliary=None,
         z=None, k=None, seed=0, heterogeneous=False):
    method = Method(method)
    threshold = get_setting('THRESHOLD') if threshold is None else float(threshold)
    max_iterations = get_setting('MAX_ITERATIONS') if max_iterations is None else int(max_iterations)
    if max_iterations < 1:
        raise ValueError(f"Бюджет захватов должен быть >= 1: {max_iterations}")
    names = _check_models(models)
    if auxiliary is not None and tuple(auxiliary.class_names) != names:
        raise MetadataMismatch(f"Классы вспомогательной модели {auxiliary.class_names} != {names}")
    if method is Method.BC_IP and auxiliary is None:
        raise ValueError("Метод bc_ip требует вспомогательный классификатор")

    session = _session(method, len(names), threshold)
    single = next(iter(models.values()))
    physical, status, exhausted, prior = 0, None, False, None

    if method is Method.BC_IP:
        prior = tuple(_set_prior(session, auxiliary, sampler.next_grasp()))
        physical = 1

    while physical < max_iterations:
        try:
            grasp = sampler.next_grasp()
        except SamplerExhausted:
            if physical == 0:
                raise
            exhausted = True
            logger.warning(f"{sampler}: захваты закончились после {physical}")
            break
        index, physical = physical, physical + 1

        parts = [grasp]
        if z is not None:
            count = min(k or get_setting('Z_COMBINATIONS'), math.comb(grasp.n, z))
            parts = sample_z_combinations(grasp, z, count, derive_rng(seed, STREAM_COMBINATIONS, index))

        for part in parts:
            if heterogeneous:
                if part.n not in models:
                    raise MissingModelForZ(f"Нет модели для z = {part.n} (есть {sorted(models)})")
                model = models[part.n]
            else:
                model = single
            try:
                vector = vectorize(part, model.shape)
            except DegenerateGrasp as e:
                logger.warning(f"Захват {index + 1}: вырожденный подзахват пропущен ({e})")
                _append(session, index, part.n, (), FLAG_DEGENERATE)
                continue
            status = _apply(session, method, model, vector, index, part.n)
            if status.converged:
                break
        if status is not None and status.converged:
            break

    if status is None:
        status = UpdateStatus(False, session.leader, session.certainty)
    result = RecognitionResult(
        predicted=session.leader,
        class_name=names[session.leader],
        method=method,
        threshold=threshold,
        converged=status.converged,
        certainty=session.certainty,
        physical_grasps=physical,
        updates=session.iteration,
        state=tuple(float(x) for x in session.state()),
        trace=tuple(session.trace),
        skipped_updates=getattr(session, 'skipped', 0),
        sampler_exhausted=exhausted,
        prior=prior,
        class_names=names,
    )
    recognition_finished.send(sender=method.value, result=result, source=str(sampler))
    return result


def _ic_method(mode):
    return Method.IC_FULL if IcMode(mode) is IcMode.FULL_ACCUMULATE else Method.IC


def _bc_method(prior):
    return Method.BC_IP if PriorSource(prior) is PriorSource.IP else Method.BC_NP


def run_ic(sampler, model, threshold=None, max_iterations=None, mode=IcMode.ARGMAX_ONLY):
    """
    Итеративная классификация: накопление баллов до ŝ_max > threshold.

    Raises:
        SamplerExhausted: источник не дал ни одного захвата
    """
    return _run(_ic_method(mode), sampler, {model.shape.n: model}, threshold, max_iterations)


def run_bc(sampler, model, threshold=None, prior=PriorSource.NP, auxiliary=None, max_iterations=None):
    """
    Байесовская классификация. NP - равномерное априорное распределение;
    IP - предсказание `auxiliary` по первому захвату, обновления со второго.
    """
    return _run(_bc_method(prior), sampler, {model.shape.n: model}, threshold, max_iterations, auxiliary)


def run_ic_z(sampler, model, z, k=None, threshold=None, max_iterations=None, mode=IcMode.ARGMAX_ONLY, seed=0):
    """
    IC по z-пальцевым подзахватам: из каждого физического захвата берётся
    k комбинаций (не больше C(n, z)), сходимость проверяется после каждой.
    """
    if model.shape.n != z:
        raise MetadataMismatch(f"Модель обучена на n = {model.shape.n}, а z = {z}")
    return _run(_ic_method(mode), sampler, {z: model}, threshold, max_iterations, z=z, k=k, seed=seed)


def run_bc_z(sampler, model, z, k=None, threshold=None, prior=PriorSource.NP, auxiliary=None,
             max_iterations=None, seed=0):
    if model.shape.n != z:
        raise MetadataMismatch(f"Модель обучена на n = {model.shape.n}, а z = {z}")
    return _run(_bc_method(prior), sampler, {z: model}, threshold, max_iterations, auxiliary, z=z, k=k, seed=seed)


def run_heterogeneous(sampler, models, method, threshold=None, max_iterations=None, auxiliary=None):
    """
    Захваты с переменным числом пальцев: каждый направляется в модель своего z,
    обновления копятся в одной сессии.

    Raises:
        MissingModelForZ: выпал z, для которого нет модели
    """
    return _run(method, sampler, dict(models), threshold, max_iterations, auxiliary, heterogeneous=True)


def recognize(method, sampler, model=None, models=None, threshold=None, max_iterations=None, auxiliary=None,
              z=None, k=None, seed=0):
    """Выбор цикла по методу и настройкам: обычный, z-вариант или разнородный."""
    method = Method(method)
    if models:
        return run_heterogeneous(sampler, models, method, threshold, max_iterations, auxiliary)
    if z is not None:
        if method.bayesian:
            return run_bc_z(sampler, model, z, k, threshold, method.prior, auxiliary, max_iterations, seed)
        return run_ic_z(sampler, model, z, k, threshold, max_iterations, method.ic_mode, seed)
    if method.bayesian:
        return run_bc(sampler, model, threshold, method.prior, auxiliary, max_iterations)
    return run_ic(sampler, model, threshold, max_iterations, method.ic_mode)
