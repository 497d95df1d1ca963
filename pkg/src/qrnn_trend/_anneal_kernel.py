"""Compiled inner loop of the simulated annealer.

Single-bit-flip Metropolis over a geometric beta ladder, with incremental
energy and one-hot bookkeeping so every accepted flip is a sample, plus a
final zero-temperature descent. Kept free of Python objects so numba can
compile it once and reuse the cache.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def anneal(a, w, offset, group_flat, group_offsets, group_of,
           aux_z, aux_i, aux_j, sweeps, reads, beta_start, beta_end, seed):
    np.random.seed(seed)
    n = a.shape[0]
    n_groups = group_offsets.shape[0] - 1

    # feasible one-hot starts with consistent auxiliaries
    x = np.empty((reads, n), np.float64)
    for r in range(reads):
        for i in range(n):
            x[r, i] = 1.0 if np.random.random() < 0.5 else 0.0
        for g in range(n_groups):
            s, e = group_offsets[g], group_offsets[g + 1]
            for t in range(s, e):
                x[r, group_flat[t]] = 0.0
            pick = s + int(np.random.random() * (e - s))
            if pick >= e:
                pick = e - 1
            x[r, group_flat[pick]] = 1.0
        for t in range(aux_z.shape[0]):
            x[r, aux_z[t]] = x[r, aux_i[t]] * x[r, aux_j[t]]

    energies = np.empty(reads, np.float64)
    counts = np.zeros((reads, n_groups), np.int64)
    for r in range(reads):
        e = offset
        for i in range(n):
            if x[r, i] != 0.0:
                e += a[i]
                for j in range(i + 1, n):
                    e += w[i, j] * x[r, j]
        energies[r] = e
        for g in range(n_groups):
            c = 0
            for t in range(group_offsets[g], group_offsets[g + 1]):
                c += int(x[r, group_flat[t]])
            counts[r, g] = c

    best_fe = np.inf
    best_f = np.zeros(n, np.float64)
    found_f = False
    best_ae = np.inf
    best_a = x[0].copy()
    feasible_count = 0

    for r in range(reads):
        feas = True
        for g in range(n_groups):
            if counts[r, g] != 1:
                feas = False
                break
        if feas:
            feasible_count += 1
            if energies[r] < best_fe:
                best_fe = energies[r]
                best_f[:] = x[r]
                found_f = True
        if energies[r] < best_ae:
            best_ae = energies[r]
            best_a[:] = x[r]

    ratio = beta_end / beta_start
    for s in range(sweeps):
        frac = s / (sweeps - 1) if sweeps > 1 else 1.0
        beta = beta_start * ratio ** frac
        for i in range(n):
            gi = group_of[i]
            for r in range(reads):
                h = a[i]
                for j in range(n):
                    h += w[j, i] * x[r, j]
                de = (1.0 - 2.0 * x[r, i]) * h
                if de <= 0.0 or np.random.random() < math.exp(-beta * de):
                    x[r, i] = 1.0 - x[r, i]
                    energies[r] += de
                    if gi >= 0:
                        counts[r, gi] += 1 if x[r, i] == 1.0 else -1
                    feas = True
                    for g in range(n_groups):
                        if counts[r, g] != 1:
                            feas = False
                            break
                    if feas:
                        feasible_count += 1
                        if energies[r] < best_fe:
                            best_fe = energies[r]
                            best_f[:] = x[r]
                            found_f = True
                    if energies[r] < best_ae:
                        best_ae = energies[r]
                        best_a[:] = x[r]

    # zero-temperature cleanup
    for _ in range(n):
        improved = False
        for i in range(n):
            gi = group_of[i]
            for r in range(reads):
                h = a[i]
                for j in range(n):
                    h += w[j, i] * x[r, j]
                de = (1.0 - 2.0 * x[r, i]) * h
                if de < 0.0:
                    x[r, i] = 1.0 - x[r, i]
                    energies[r] += de
                    if gi >= 0:
                        counts[r, gi] += 1 if x[r, i] == 1.0 else -1
                    improved = True
                    feas = True
                    for g in range(n_groups):
                        if counts[r, g] != 1:
                            feas = False
                            break
                    if feas:
                        if energies[r] < best_fe:
                            best_fe = energies[r]
                            best_f[:] = x[r]
                            found_f = True
                    if energies[r] < best_ae:
                        best_ae = energies[r]
                        best_a[:] = x[r]
        if not improved:
            break

    return best_f, best_fe, found_f, best_a, best_ae, feasible_count
