"""The three goal-selection strategies and why value propagation matters.

A stateless bandit EMA forgets a goal as soon as its reward fades. A
per-context EMA does the same, just per state. Q-learning instead lets a
goal's value include the discounted rewards of the goals it unlocks, so
mastered preconditions keep being selected while anything downstream still
pays out.
"""

import numpy as np

from lightup import BanditValues, ContextualValues, QValues, softmax_probabilities

print("=== EMA value stores ===")
bandit = BanditValues(6)
bandit.update((), 2, 1.0)
print("bandit after one reward of 1.0 on goal 2:", np.round(bandit.values, 3))

ctx = ContextualValues(6)
ctx.update((1,), 0, 0.5)
print("contextual cell (cf=1, goal a):", ctx.goal_values((1,))[0],
      " cf=0 row untouched:", ctx.goal_values((0,)).tolist())

print("\n=== softmax selection ===")
values = np.array([0.5, 0, 0, 0, 0, 0])
for tau in (1.0, 0.1, 0.01):
    p = softmax_probabilities(values, tau)
    print(f"temperature {tau:5.2f}: leader probability {p[0]:.4f}")

print("\n=== value propagation along a chain ===")
# Deterministic two-step chain: the start goal never pays by itself, the end
# goal pays 0.1 per trial. The bandit forgets the start; Q keeps it alive.
q = QValues(2)
bandit = BanditValues(2)
bandit.values[0] = 0.05  # pretend the start goal was once intrinsically rewarding
start, end = ("start",), ("end",)
for _ in range(2000):
    q.update(start, 0, 0.0, end, False)   # start goal: reward long gone
    q.update(end, 1, 0.1, ("done",), True)  # end goal still yields reward
    bandit.update((), 0, 0.0)
print(f"after 2000 trials:")
print(f"  bandit value of the chain start: {bandit.values[0]:.6f} (faded to nothing)")
print(f"  Q value of the chain start:      {q.goal_values(start)[0]:.4f} "
      f"(~ discount x end value = 0.3 x {q.goal_values(end)[1]:.3f})")

p_bandit = softmax_probabilities(np.array([bandit.values[0], 0.0]), 0.01)
p_q = softmax_probabilities(np.array([q.goal_values(start)[0], 0.0]), 0.001)
print(f"  selection probability of the start vs an idle goal: "
      f"bandit {p_bandit[0]:.2f}, Q {p_q[0]:.2f}")
