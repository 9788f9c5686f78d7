# -*- coding: utf-8 -*-
"""
Single-hidden-layer feedforward network with logistic hidden units and a
linear output without bias:

    f(x) = sum_h theta1[h] * phi(sum_j theta0[h, j] * x[j] (+ theta0[h, J]))

The flat parameter vector is theta0 in row-major (hidden-unit-major) order
followed by theta1.  When ``hidden_bias`` is set, each theta0 row carries the
bias as its last entry.
"""
from __future__ import absolute_import, division, print_function
import numpy as np

from scipy.special import expit
from momentann.utils import InputError


class SlfnSpec(object):
    def __init__(self, J, H, hidden_bias=False):
        if J < 1 or H < 1:
            raise InputError('network needs J >= 1 and H >= 1, got J=%r H=%r' % (J, H))
        self.J = int(J)
        self.H = int(H)
        self.hidden_bias = bool(hidden_bias)

    @property
    def row_width(self):
        return self.J + 1 if self.hidden_bias else self.J

    @property
    def P(self):
        return (self.row_width + 1) * self.H

    def __eq__(self, other):
        return isinstance(other, SlfnSpec) and (self.J, self.H, self.hidden_bias) == (
            other.J,
            other.H,
            other.hidden_bias,
        )

    def __repr__(self):
        return 'SlfnSpec(J=%d, H=%d, hidden_bias=%r)' % (self.J, self.H, self.hidden_bias)


class SlfnParams(object):
    def __init__(self, spec, theta0, theta1):
        theta0 = np.asarray(theta0, dtype=np.float64).reshape(spec.H, spec.row_width)
        theta1 = np.asarray(theta1, dtype=np.float64).reshape(spec.H)
        if not (np.all(np.isfinite(theta0)) and np.all(np.isfinite(theta1))):
            raise InputError('network parameters must be finite')
        self.spec = spec
        self.theta0 = theta0
        self.theta1 = theta1

    @property
    def flat(self):
        return np.concatenate((self.theta0.ravel(), self.theta1))

    @classmethod
    def from_flat(cls, spec, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (spec.P,):
            raise InputError('expected %d parameters, got %s' % (spec.P, flat.shape))
        split = spec.H * spec.row_width
        return cls(spec, flat[:split], flat[split:])

    @classmethod
    def zeros(cls, spec):
        return cls.from_flat(spec, np.zeros(spec.P))

    @property
    def weights(self):
        return self.theta0[:, : self.spec.J]

    @property
    def bias(self):
        if self.spec.hidden_bias:
            return self.theta0[:, self.spec.J]
        return np.zeros(self.spec.H)

    def to_dict(self):
        return {
            'J': self.spec.J,
            'H': self.spec.H,
            'hidden_bias': self.spec.hidden_bias,
            'theta0': self.theta0.tolist(),
            'theta1': self.theta1.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        spec = SlfnSpec(data['J'], data['H'], data.get('hidden_bias', False))
        return cls(spec, data['theta0'], data['theta1'])

    def __repr__(self):
        return '<SlfnParams %r>' % (self.spec,)


def _inputs(params, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != params.spec.J:
        raise InputError(
            'input has dimension %d but the network expects J=%d' % (X.shape[1], params.spec.J)
        )
    return X, single


def _hidden(params, X):
    Z = X @ params.weights.T + params.bias
    return expit(Z)


def forward(params, x):
    r"""
    Network output for one input vector (scalar) or a matrix of rows.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.slfn import *  # NOQA
        >>> assert forward(SlfnParams.zeros(SlfnSpec(2, 3)), [0.4, -1.0]) == 0.0
        >>> one = SlfnParams(SlfnSpec(2, 1), [[0.0, 0.0]], [2.0])
        >>> assert forward(one, [5.0, -7.0]) == 1.0
        >>> two = SlfnParams(SlfnSpec(2, 2), [[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
        >>> assert forward(two, [0.3, 0.3]) == 0.0
        >>> assert abs(forward(one, [1e6, 1e6])) <= 2.0
        >>> import pytest
        >>> with pytest.raises(InputError):
        ...     forward(two, [1.0, 2.0, 3.0])

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # unit permutation and sign flips
        >>> from momentann.slfn import *  # NOQA
        >>> rng = np.random.RandomState(0)
        >>> spec = SlfnSpec(3, 4)
        >>> params = SlfnParams.from_flat(spec, rng.randn(spec.P))
        >>> X = rng.randn(20, 3)
        >>> perm = rng.permutation(4)
        >>> permuted = SlfnParams(spec, params.theta0[perm], params.theta1[perm])
        >>> assert np.allclose(forward(permuted, X), forward(params, X), rtol=0, atol=1e-13)
        >>> flipped0, flipped1 = params.theta0.copy(), params.theta1.copy()
        >>> flipped0[1], flipped1[1] = -flipped0[1], -flipped1[1]
        >>> diff = forward(SlfnParams(spec, flipped0, flipped1), X) - forward(params, X)
        >>> assert np.allclose(diff, -params.theta1[1], rtol=0, atol=1e-12)
        >>> assert np.all(np.abs(forward(params, 100 * X)) <= np.abs(params.theta1).sum() + 1e-12)
    """
    X, single = _inputs(params, x)
    out = _hidden(params, X) @ params.theta1
    return float(out[0]) if single else out


def grad_params(params, x):
    r"""
    Derivative of the output with respect to the flat parameter vector
    (backpropagation).  For a matrix of rows this is the n x P Jacobian.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.slfn import *  # NOQA
        >>> spec = SlfnSpec(2, 3)
        >>> grad = grad_params(SlfnParams.zeros(spec), [1.0, 1.0])
        >>> assert grad.tolist() == [0.0] * 6 + [0.5] * 3
        >>> params = SlfnParams.from_flat(spec, np.arange(1.0, 10.0) / 10)
        >>> assert np.all(grad_params(params, [0.0, 0.0])[:6] == 0.0)

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # analytic gradients match central finite differences
        >>> from momentann.slfn import *  # NOQA
        >>> rng = np.random.RandomState(42)
        >>> step = 1e-5
        >>> for _ in range(100):
        ...     spec = SlfnSpec(rng.randint(1, 6), rng.randint(1, 11), hidden_bias=rng.rand() < 0.3)
        ...     flat = np.concatenate((rng.randn(spec.H * spec.row_width),
        ...                            rng.randn(spec.H) / np.sqrt(spec.H)))
        ...     params = SlfnParams.from_flat(spec, flat)
        ...     x = rng.uniform(-1, 1, spec.J)
        ...     fd = np.empty(spec.P)
        ...     for p in range(spec.P):
        ...         e = np.zeros(spec.P)
        ...         e[p] = step
        ...         fd[p] = (forward(SlfnParams.from_flat(spec, flat + e), x)
        ...                  - forward(SlfnParams.from_flat(spec, flat - e), x)) / (2 * step)
        ...     assert np.allclose(grad_params(params, x), fd, rtol=1e-6, atol=1e-10)
        ...     fd = np.empty(spec.J)
        ...     for j in range(spec.J):
        ...         e = np.zeros(spec.J)
        ...         e[j] = step
        ...         fd[j] = (forward(params, x + e) - forward(params, x - e)) / (2 * step)
        ...     assert np.allclose(grad_input(params, x), fd, rtol=1e-6, atol=1e-10)
    """
    X, single = _inputs(params, x)
    spec = params.spec
    A = _hidden(params, X)
    delta = A * (1.0 - A) * params.theta1
    if spec.hidden_bias:
        X = np.hstack((X, np.ones((X.shape[0], 1))))
    jac0 = (delta[:, :, None] * X[:, None, :]).reshape(X.shape[0], spec.H * spec.row_width)
    jac = np.hstack((jac0, A))
    return jac[0] if single else jac


def grad_input(params, x):
    r"""
    Derivative of the output with respect to the inputs.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.slfn import *  # NOQA
        >>> assert grad_input(SlfnParams.zeros(SlfnSpec(3, 2)), [1.0, 2.0, 3.0]).tolist() == [0.0] * 3
        >>> one = SlfnParams(SlfnSpec(2, 1), [[0.5, -2.0]], [3.0])
        >>> x = np.array([0.2, 0.1])
        >>> phi = 1.0 / (1.0 + np.exp(-(0.5 * 0.2 - 2.0 * 0.1)))
        >>> assert np.allclose(grad_input(one, x), 3.0 * phi * (1 - phi) * np.array([0.5, -2.0]))
        >>> swapped = SlfnParams(SlfnSpec(2, 1), [[-2.0, 0.5]], [3.0])
        >>> assert np.allclose(grad_input(swapped, x[::-1]), grad_input(one, x)[::-1])
    """
    X, single = _inputs(params, x)
    A = _hidden(params, X)
    delta = A * (1.0 - A) * params.theta1
    grad = delta @ params.weights
    return grad[0] if single else grad


def check_fully_connected(params, tol):
    r"""
    Hidden units whose output weight is below ``tol`` in absolute value
    (0-based indices).  An empty list means every unit is connected.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.slfn import *  # NOQA
        >>> params = SlfnParams(SlfnSpec(1, 2), [[1.0], [1.0]], [0.5, 1e-12])
        >>> assert check_fully_connected(params, 1e-8) == [1]
        >>> assert check_fully_connected(params, 1e-13) == []
        >>> assert check_fully_connected(params, 0.0) == []
    """
    return [int(h) for h in np.flatnonzero(np.abs(params.theta1) < tol)]


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.slfn --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
