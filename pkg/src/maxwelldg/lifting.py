"""Face lifting operators and trace moment maps.

Face data is stored modewise: every face carries an orthonormal Legendre
basis in its arclength parameter s in [0, 1] (modes 0..l).  Scalar face
data (tangential jumps, boundary data) uses l + 1 coefficients per face;
vector face data (normal jumps, multipliers) uses 2(l + 1) coefficients
ordered mode-major, component-minor (index 2m + c).

Two liftings act on this data, both supported on the one or two elements
next to the face:

* the scalar lifting of eta in P_l(F) into the broken scalar space,
  defined by (r_F eta, w) = int_F eta {{w}} for all broken w in P_l;
* the componentwise vector lifting of lambda in P_l(F)^2 into the broken
  vector space (P_l)^2, (R_F lam, w) = int_F lam . {{w}}.

Because the broken scalar basis is orthonormal per element (mass
2|K| I), the lifting coefficients are closed-form moment maps; every
face contributes a rank-(l+1) block.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse import block_diag, coo_matrix, csr_matrix

from .basis import face_modes
from .quadrature import segment_rule
from .spaces import FemField, Spaces

__all__ = ["Lifting"]


class Lifting:
    """Geometry-dependent lifting tables for a given discrete space.

    Material weights are passed into the Gram/pairing builders, so one
    instance serves any coefficient field on the same mesh.
    """

    def __init__(self, spaces: Spaces):
        self.spaces = spaces
        mesh = spaces.mesh
        l = spaces.degree
        self.n_modes = l + 1
        nf = mesh.num_faces

        rule = segment_rule(2 * l + 2)
        s, w = rule.points, rule.weights
        modes = face_modes(l, s)                  # (np, l+1)

        # sides[f]: list of (element, average factor, jump sign)
        self.sides = []
        # trace_q[f][side]: moments of the scalar basis, (l+1, ndof_q)
        # trace_v[f][side]: moments of n+ x (mapped V basis), (l+1, ndof_v)
        self.trace_q = []
        self.trace_v = []
        # weight[f][side]: (avg h_F)^2 / det_jac, the lifting Gram factor
        self.weight = []

        for f in range(nf):
            elems = [int(e) for e in mesh.face_elements[f] if e >= 0]
            avg = 1.0 if mesh.boundary[f] else 0.5
            signs = [1.0, -1.0][: len(elems)]
            n = mesh.face_normals[f]
            h = mesh.face_lengths[f]
            phys = spaces.face_points(f, s)
            tq, tv, wt, side = [], [], [], []
            for e, sg in zip(elems, signs):
                ref = spaces.ref_coords(e, phys)
                qv = spaces.qbasis.eval(ref)                      # (np, nq)
                tq.append(np.einsum("p,pm,pr->mr", w, modes, qv))
                vv = np.einsum("dk,pnk->pnd", spaces.inv_jac_t[e],
                               spaces.vbasis.eval(ref))
                cross = n[0] * vv[:, :, 1] - n[1] * vv[:, :, 0]   # n x v
                tv.append(np.einsum("p,pm,pn->mn", w, modes, cross))
                wt.append((avg * h) ** 2 / spaces.det_jac[e])
                side.append((e, avg, sg))
            self.sides.append(side)
            self.trace_q.append(tq)
            self.trace_v.append(tv)
            self.weight.append(wt)

        self._jump_tangential = None
        self._jump_normal = None
        self._lift_scalar = None
        self._lift_vector = None

    # ------------------------------------------------------------------
    # sparse jump/trace maps

    @property
    def dim_scalar_data(self) -> int:
        return self.spaces.mesh.num_faces * self.n_modes

    @property
    def dim_vector_data(self) -> int:
        return self.spaces.mesh.num_faces * 2 * self.n_modes

    def scalar_data_dofs(self, face: int) -> np.ndarray:
        return np.arange(face * self.n_modes, (face + 1) * self.n_modes)

    def jump_tangential(self) -> csr_matrix:
        """Map V coefficients to face coefficients of the tangential jump
        (n x v on the boundary)."""
        if self._jump_tangential is None:
            sp = self.spaces
            rows, cols, vals = [], [], []
            for f, side in enumerate(self.sides):
                rix = self.scalar_data_dofs(f)
                for (e, _, sg), tv in zip(side, self.trace_v[f]):
                    block = sg * tv
                    cix = sp.v_dofs(e)
                    rr, cc = np.meshgrid(rix, cix, indexing="ij")
                    rows.append(rr.ravel())
                    cols.append(cc.ravel())
                    vals.append(block.ravel())
            self._jump_tangential = coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.dim_scalar_data, sp.dim_V)).tocsr()
        return self._jump_tangential

    def jump_normal(self) -> csr_matrix:
        """Map Q coefficients to face coefficients of the vector-valued
        normal jump (q n on the boundary)."""
        if self._jump_normal is None:
            sp = self.spaces
            nm = self.n_modes
            rows, cols, vals = [], [], []
            for f, side in enumerate(self.sides):
                n = sp.mesh.face_normals[f]
                for (e, _, sg), tq in zip(side, self.trace_q[f]):
                    cix = sp.q_dofs(e)
                    for c in range(2):
                        rix = f * 2 * nm + 2 * np.arange(nm) + c
                        block = sg * n[c] * tq
                        rr, cc = np.meshgrid(rix, cix, indexing="ij")
                        rows.append(rr.ravel())
                        cols.append(cc.ravel())
                        vals.append(block.ravel())
            self._jump_normal = coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.dim_vector_data, sp.dim_Q)).tocsr()
        return self._jump_normal

    # ------------------------------------------------------------------
    # lifting coefficient maps

    def lift_scalar_matrix(self) -> csr_matrix:
        """Map scalar face data to broken scalar coefficients of the sum of
        the per-face liftings."""
        if self._lift_scalar is None:
            sp = self.spaces
            rows, cols, vals = [], [], []
            for f, side in enumerate(self.sides):
                h = sp.mesh.face_lengths[f]
                cix = self.scalar_data_dofs(f)
                for (e, avg, _), tq in zip(side, self.trace_q[f]):
                    block = (avg * h / sp.det_jac[e]) * tq.T     # (nq, nmodes)
                    rix = sp.q_dofs(e)
                    rr, cc = np.meshgrid(rix, cix, indexing="ij")
                    rows.append(rr.ravel())
                    cols.append(cc.ravel())
                    vals.append(block.ravel())
            self._lift_scalar = coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(sp.dim_Q, self.dim_scalar_data)).tocsr()
        return self._lift_scalar

    def lift_vector_matrix(self) -> csr_matrix:
        """Map vector face data to broken vector coefficients (layout
        (element, mode, component))."""
        if self._lift_vector is None:
            sp = self.spaces
            nm = self.n_modes
            nq = sp.ndof_q
            rows, cols, vals = [], [], []
            for f, side in enumerate(self.sides):
                h = sp.mesh.face_lengths[f]
                for (e, avg, _), tq in zip(side, self.trace_q[f]):
                    block = (avg * h / sp.det_jac[e]) * tq.T
                    for c in range(2):
                        rix = 2 * (e * nq + np.arange(nq)) + c
                        cix = f * 2 * nm + 2 * np.arange(nm) + c
                        rr, cc = np.meshgrid(rix, cix, indexing="ij")
                        rows.append(rr.ravel())
                        cols.append(cc.ravel())
                        vals.append(block.ravel())
            self._lift_vector = coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(2 * sp.dim_Q, self.dim_vector_data)).tocsr()
        return self._lift_vector

    def lift_scalar(self, data: np.ndarray) -> FemField:
        return FemField("LS", self.lift_scalar_matrix() @ data)

    def lift_vector(self, data: np.ndarray) -> FemField:
        return FemField("LV", self.lift_vector_matrix() @ data)

    # ------------------------------------------------------------------
    # per-face Gram matrices of lifted data

    def face_grams_scalar(self, weight: np.ndarray | None = None) -> list:
        """(w r_F(mode_i), r_F(mode_j)) with a piecewise-constant scalar
        weight (per element); unweighted when weight is None."""
        out = []
        for f, side in enumerate(self.sides):
            g = np.zeros((self.n_modes, self.n_modes))
            for (e, _, _), tq, wt in zip(side, self.trace_q[f], self.weight[f]):
                scale = wt if weight is None else wt * weight[e]
                g += scale * (tq @ tq.T)
            out.append(g)
        return out

    def face_grams_vector(self, eps: np.ndarray | None = None) -> list:
        """(eps R_F(mode_i), R_F(mode_j)) for a per-element 2x2 SPD field;
        identity weight when eps is None.  Mode-major, component-minor."""
        eye = np.eye(2)
        out = []
        for f, side in enumerate(self.sides):
            g = np.zeros((2 * self.n_modes, 2 * self.n_modes))
            for (e, _, _), tq, wt in zip(side, self.trace_q[f], self.weight[f]):
                mat = eye if eps is None else eps[e]
                g += wt * np.kron(tq @ tq.T, mat)
            out.append(g)
        return out

    def block_diag_scalar(self, factors: np.ndarray,
                          weight: np.ndarray | None = None) -> csr_matrix:
        """Block diagonal of per-face scalar Grams scaled by factors[f]."""
        grams = self.face_grams_scalar(weight)
        return block_diag([fac * g for fac, g in zip(factors, grams)],
                          format="csr")

    def block_diag_vector(self, factors: np.ndarray,
                          eps: np.ndarray | None = None) -> csr_matrix:
        grams = self.face_grams_vector(eps)
        return block_diag([fac * g for fac, g in zip(factors, grams)],
                          format="csr")

    # ------------------------------------------------------------------
    # pairings against V fields

    def curl_pair(self, weight: np.ndarray) -> csr_matrix:
        """Rows (face, mode), columns V dofs: (r_F(mode), w mu_curl) where
        mu_curl is the weighted elementwise curl, weight per element."""
        sp = self.spaces
        cc = sp.ref_curl_coeff                    # (nq, nv)
        rows, cols, vals = [], [], []
        for f, side in enumerate(self.sides):
            h = sp.mesh.face_lengths[f]
            rix = self.scalar_data_dofs(f)
            for (e, avg, _), tq in zip(side, self.trace_q[f]):
                block = weight[e] * (avg * h / sp.det_jac[e]) * (tq @ cc)
                cix = sp.v_dofs(e)
                rr, ccix = np.meshgrid(rix, cix, indexing="ij")
                rows.append(rr.ravel())
                cols.append(ccix.ravel())
                vals.append(block.ravel())
        return coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim_scalar_data, sp.dim_V)).tocsr()

    def vector_value_pair(self, eps: np.ndarray) -> csr_matrix:
        """Rows (face, mode, component), columns V dofs:
        (eps v, R_F(mode, component)) for the per-element 2x2 field eps."""
        sp = self.spaces
        nm = self.n_modes
        rows, cols, vals = [], [], []
        for f, side in enumerate(self.sides):
            h = sp.mesh.face_lengths[f]
            for (e, avg, _), tq in zip(side, self.trace_q[f]):
                # component expansion of the mapped V basis in the local
                # orthonormal scalar basis
                comp = np.einsum("ck,krn->crn", sp.inv_jac_t[e],
                                 sp.ref_comp_coeff)              # (2, nq, nv)
                cix = sp.v_dofs(e)
                for c in range(2):
                    rix = f * 2 * nm + 2 * np.arange(nm) + c
                    weighted = np.einsum("k,krn->rn", eps[e][c], comp)
                    block = (avg * h) * (tq @ weighted)
                    rr, ccix = np.meshgrid(rix, cix, indexing="ij")
                    rows.append(rr.ravel())
                    cols.append(ccix.ravel())
                    vals.append(block.ravel())
        return coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim_vector_data, sp.dim_V)).tocsr()

    # ------------------------------------------------------------------
    # face data projections

    def project_scalar_data(self, func, degree: int | None = None,
                            boundary_only: bool = False) -> np.ndarray:
        """L^2-project a scalar callable onto the face mode basis."""
        sp = self.spaces
        rule = segment_rule(2 * sp.degree + 8 if degree is None else degree)
        s, w = rule.points, rule.weights
        modes = face_modes(sp.degree, s)
        data = np.zeros(self.dim_scalar_data)
        for f in range(sp.mesh.num_faces):
            if boundary_only and not sp.mesh.boundary[f]:
                continue
            phys = sp.face_points(f, s)
            vals = np.asarray(func(phys[:, 0], phys[:, 1]))
            data[self.scalar_data_dofs(f)] = np.einsum("p,pm,p->m", w, modes, vals)
        return data

    def tangential_boundary_data(self, u_func, degree: int | None = None) -> np.ndarray:
        """Face coefficients of n x u on the boundary (zero on interior
        faces) for a vector callable u_func(x, y) -> (2,) or (np, 2)."""
        sp = self.spaces
        rule = segment_rule(2 * sp.degree + 8 if degree is None else degree)
        s, w = rule.points, rule.weights
        modes = face_modes(sp.degree, s)
        data = np.zeros(self.dim_scalar_data)
        for f in np.flatnonzero(sp.mesh.boundary):
            n = sp.mesh.face_normals[f]
            phys = sp.face_points(f, s)
            vals = np.asarray(u_func(phys[:, 0], phys[:, 1]))
            cross = n[0] * vals[..., 1] - n[1] * vals[..., 0]
            data[self.scalar_data_dofs(f)] = np.einsum("p,pm,p->m", w, modes, cross)
        return data

    # ------------------------------------------------------------------
    # stability

    def stability_constants(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-face two-sided constants (C1_F, C2_F) of the tangential
        lifting: extreme generalized eigenvalues of ||r_F(eta)||^2 against
        h_F^{-1} ||eta||_F^2 over the space of attainable tangential jumps
        (polynomials of degree l - 1 on the face, modes 0..l-1).

        h_F^{-1} times the face mass is the identity in the orthonormal
        mode basis, so the quotient reduces to a plain eigenvalue problem.
        """
        nf = self.spaces.mesh.num_faces
        njump = self.spaces.degree          # attainable jump modes per face
        c1 = np.empty(nf)
        c2 = np.empty(nf)
        for f, gram in enumerate(self.face_grams_scalar()):
            ev = eigvalsh(gram[:njump, :njump])
            c1[f] = np.sqrt(max(ev[0], 0.0))
            c2[f] = np.sqrt(ev[-1])
        return c1, c2
