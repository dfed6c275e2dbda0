"""Independent numpy oracles used to freeze expected values in the C++ unit tests.

Run once; the printed literals are pasted into tests/unit/*.cpp.
"""
import numpy as np

np.set_printoptions(precision=17)


def masked_contract_n3():
    w = np.array([[0.5, -1.0, 2.0], [1.5, 0.25, -0.75], [-2.0, 0.5, 1.0]])
    # k = 1: row i selects one column
    support = [[2], [0], [1]]
    j = np.array([[1.0, 2.0, -1.0, 0.5], [0.0, -3.0, 4.0, 1.0], [2.5, 1.0, 0.0, -2.0]])
    out = np.zeros((3, 4))
    for i in range(3):
        for p in range(4):
            acc = 0.0
            for l in range(3):
                if l in support[i]:
                    acc += w[i, l] * j[l, p]
            out[i, p] = acc
    print("masked_contract n3:", repr(out))


def rnn_n3():
    w_hh = np.array([[0.1, -0.4, 0.3], [0.6, 0.2, -0.5], [-0.3, 0.8, 0.05]])
    w_ih = np.array([[0.7, -0.2], [0.1, 0.9], [-0.6, 0.4]])
    b_h = np.array([0.05, -0.1, 0.2])
    w_out = np.array([[0.3, -0.7, 1.1], [0.5, 0.2, -0.4]])
    b_out = np.array([0.01, -0.02])
    h_prev = np.array([0.2, -0.5, 0.9])
    x = np.array([1.0, -0.3])
    h = np.zeros(3)
    for i in range(3):
        s = b_h[i]
        for k in range(3):
            s += w_hh[i, k] * h_prev[k]
        for k in range(2):
            s += w_ih[i, k] * x[k]
        h[i] = np.tanh(s)
    y = np.zeros(2)
    for o in range(2):
        y[o] = b_out[o] + sum(w_out[o, i] * h[i] for i in range(3))
    print("rnn h:", repr(h))
    print("rnn y:", repr(y))


def lstm_n3():
    rng = np.random.default_rng(5)
    n, m = 3, 2
    W = [np.round(rng.normal(0, 0.5, (n, n + m)), 3) for _ in range(4)]
    b = [np.round(rng.normal(0, 0.2, n), 3) for _ in range(4)]
    h_prev = np.array([0.1, -0.2, 0.3])
    c_prev = np.array([0.5, -0.4, 0.2])
    x = np.array([0.7, -1.1])
    z = np.concatenate([h_prev, x])
    sig = lambda a: 1 / (1 + np.exp(-a))
    i = sig(W[0] @ z + b[0])
    f = sig(W[1] @ z + b[1])
    g = np.tanh(W[2] @ z + b[2])
    o = sig(W[3] @ z + b[3])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    for name, arr in zip("ifgo", W):
        print("lstm W", name, repr(arr))
    for name, arr in zip("ifgo", b):
        print("lstm b", name, repr(arr))
    print("lstm c:", repr(c))
    print("lstm h:", repr(h))


def lorenz_rk4():
    sigma, beta, rho, dt = 10.0, 8.0 / 3.0, 28.0, 0.01

    def f(s):
        x, y, z = s
        return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])

    s = np.array([1.0, 1.0, 1.0])
    k1 = f(s)
    k2 = f(s + dt / 2 * k1)
    k3 = f(s + dt / 2 * k2)
    k4 = f(s + dt * k3)
    print("lorenz rk4:", repr(s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)))


def svd_4x8():
    a = np.array([
        [1.0, 0.0, 2.0, -1.0, 0.5, 0.0, 0.0, 1.0],
        [0.0, 3.0, 0.0, 0.0, 1.0, -2.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [-0.5, 0.0, 0.0, 2.0, 0.0, 0.0, 4.0, 0.0],
    ])
    ev = np.linalg.eigvalsh(a @ a.T)[::-1]
    print("svd 4x8:", repr(np.sqrt(ev)))


def sine_samples():
    # phase-continuous frequency switch at 1000
    def s(t):
        if t <= 1000:
            return np.sin(0.1 * t)
        return np.sin(0.1 * 1000 + 0.3 * (t - 1000))
    for t in [0, 1, 17, 1000, 1005]:
        print("sine", t, repr(s(t)))


def hand_adam():
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    theta, m, v = 0.0, 0.0, 0.0
    for t in range(1, 4):
        g = 1.0
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        theta -= lr * mh / (np.sqrt(vh) + eps)
        print("adam", t, repr(m), repr(v), repr(theta))


def hand_traces():
    # lambda = 0.5, n = 2, m = 1, three steps; B from (h_prev, x) with fixed d
    lam = 0.5
    n, m = 2, 1
    P = n * n + n * m + n
    steps = [
        (np.array([0.9, 0.5]), np.array([0.0, 0.0]), np.array([1.0])),
        (np.array([0.8, 0.6]), np.array([0.3, -0.2]), np.array([-0.5])),
        (np.array([0.7, 0.95]), np.array([0.1, 0.4]), np.array([2.0])),
    ]
    J = np.zeros((n, P))
    for d, hp, x in steps:
        B = np.zeros((n, P))
        for i in range(n):
            B[i, i * n:(i + 1) * n] = hp
            B[i, n * n + i * m:n * n + (i + 1) * m] = x
            B[i, n * n + n * m + i] = 1.0
        J = lam * np.diag(d) @ J + np.diag(d) @ B
    print("traces:", repr(J))


masked_contract_n3()
rnn_n3()
lstm_n3()
lorenz_rk4()
svd_4x8()
sine_samples()
hand_adam()
hand_traces()
