"""Complex arithmetic carried as (real, imag) pairs of real tensors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import Tensor


@dataclass
class ComplexTensor:
    re: Tensor
    im: Tensor

    @classmethod
    def from_numpy(cls, z, requires_grad: bool = False) -> "ComplexTensor":
        z = np.asarray(z)
        return cls(Tensor(z.real.copy(), requires_grad=requires_grad),
                   Tensor(np.imag(z).copy(), requires_grad=requires_grad))

    def numpy(self) -> np.ndarray:
        return self.re.data + 1j * self.im.data

    @property
    def shape(self) -> tuple:
        return self.re.shape

    def __add__(self, other: "ComplexTensor") -> "ComplexTensor":
        return ComplexTensor(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexTensor") -> "ComplexTensor":
        return ComplexTensor(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "ComplexTensor") -> "ComplexTensor":
        return ComplexTensor(self.re * other.re - self.im * other.im,
                             self.re * other.im + self.im * other.re)

    def __matmul__(self, other: "ComplexTensor") -> "ComplexTensor":
        return ComplexTensor(self.re @ other.re - self.im @ other.im,
                             self.re @ other.im + self.im @ other.re)

    def scale(self, s) -> "ComplexTensor":
        return ComplexTensor(self.re * s, self.im * s)

    def conj(self) -> "ComplexTensor":
        return ComplexTensor(self.re, -self.im)

    def abs2(self) -> Tensor:
        return T.square(self.re) + T.square(self.im)

    def swapaxes(self, a: int, b: int) -> "ComplexTensor":
        return ComplexTensor(T.swapaxes(self.re, a, b), T.swapaxes(self.im, a, b))

    def reshape(self, shape) -> "ComplexTensor":
        return ComplexTensor(T.reshape(self.re, shape), T.reshape(self.im, shape))

    def take_along_axis(self, idx: np.ndarray, axis: int) -> "ComplexTensor":
        return ComplexTensor(T.take_along_axis(self.re, idx, axis), T.take_along_axis(self.im, idx, axis))


def compose(re: Tensor, im: Tensor) -> ComplexTensor:
    return ComplexTensor(re, im)


def constant(z) -> ComplexTensor:
    return ComplexTensor.from_numpy(z, requires_grad=False)
