"""Tour of the tensor core: build a graph, run backward, verify with finite
differences.

Run: python demos/01_autograd_and_gradient_checking.py
"""

import numpy as np

import paragen.autograd as ag
from paragen.autograd import Tensor, backward
from paragen.gradcheck import grad_check

print("== a tiny expression graph ==")
x = Tensor([1.0, -2.0, 0.5], requires_grad=True)
W = Tensor(np.arange(6.0).reshape(2, 3) / 10, requires_grad=True)

y = ag.tanh(ag.matmul(W, x))          # (2,)
loss = ag.mul(y, y).sum()             # sum of squares
print("loss =", float(loss.data))

backward(loss)
print("dloss/dx =", x.grad)
print("dloss/dW =\n", W.grad)

print()
print("== the same gradients, checked against central differences ==")
x.zero_grad()
W.zero_grad()
report = grad_check(lambda: ag.mul(ag.tanh(ag.matmul(W, x)),
                                   ag.tanh(ag.matmul(W, x))).sum(),
                    [("x", x), ("W", W)], h=1e-5)
for row in report.rows[:4]:
    print(f"  {row.name}{list(row.index)}: analytic {row.analytic:+.6f} "
          f"numeric {row.numeric:+.6f} rel {row.rel_err:.1e}")
print("max relative error:", f"{report.max_rel_err:.3e}")

print()
print("== softmax conserves mass, so its summed gradient vanishes ==")
z = Tensor([0.3, -1.0, 2.0], requires_grad=True)
backward(ag.softmax(z).sum())
print("softmax sum gradient:", z.grad, "(zero: the output always sums to 1)")

print()
print("== stability corners ==")
print("softmax([1000,1000,1000]) =", ag.softmax(Tensor([1000.0] * 3)).data)
print("sigmoid(+40) =", ag.sigmoid(Tensor(40.0)).item())
print("sigmoid(-40) =", ag.sigmoid(Tensor(-40.0)).item())
print("log(0) clamps at 1e-12 ->", ag.log(Tensor([0.0])).data)
