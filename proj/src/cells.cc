#include "treelstm/cells.h"

#include <cmath>
#include <stdexcept>

#include "treelstm/embeddings.h"
#include "treelstm/errors.h"
#include "treelstm/rng.h"

namespace treelstm {

namespace {

constexpr char kGateLetter[kNumGates] = {'i', 'f', 'o', 'u'};

std::string w_name(const std::string& prefix, std::size_t g) {
  return prefix + ".W_" + kGateLetter[g];
}
std::string b_name(const std::string& prefix, std::size_t g) {
  return prefix + ".b_" + kGateLetter[g];
}
// Single-slot cells use "U_i"; N-ary cells "U_i.l" and "U_f.k.l".
std::string u_name(const std::string& prefix, std::size_t g, std::size_t block,
                   const CellShape& s) {
  std::string name = prefix + ".U_" + kGateLetter[g];
  if (s.slots == 1) return name;
  if (g == kForgetGate) {
    return name + "." + std::to_string(block / s.slots) + "." + std::to_string(block % s.slots);
  }
  return name + "." + std::to_string(block);
}

std::size_t u_blocks(std::size_t g, const CellShape& s) {
  return g == kForgetGate ? s.slots * s.slots : s.slots;
}

bool u_block_used(std::size_t g, std::size_t block, const CellShape& s) {
  return g != kForgetGate || s.offdiag || block / s.slots == block % s.slots;
}

// σ'(z) expressed through σ(z), and tanh'(z) through tanh(z).
Vec sigmoid_grad(const Vec& upstream, const Vec& act) {
  Vec out(act.dim());
  for (std::size_t k = 0; k < act.dim(); ++k) out[k] = upstream[k] * act[k] * (1.0 - act[k]);
  return out;
}
Vec tanh_grad(const Vec& upstream, const Vec& act) {
  Vec out(act.dim());
  for (std::size_t k = 0; k < act.dim(); ++k) out[k] = upstream[k] * (1.0 - act[k] * act[k]);
  return out;
}

void check_input(const GateParams& p, const Vec* x, const char* op) {
  if (x == nullptr) return;
  if (!p.shape.input) throw DimensionError(std::string(op) + ": input given to a cell without W");
  check_dim(op, "x", x->dim(), p.shape.e);
}

void check_children(std::span<const NodeState> children, std::size_t d, const char* op) {
  for (const auto& ch : children) {
    check_dim(op, "child h", ch.h.dim(), d);
    check_dim(op, "child c", ch.c.dim(), d);
  }
}

Vec gate_preact(const GateParams& p, std::size_t g, const Vec* x,
                std::span<const MatVecTerm> terms) {
  const Mat* w = x != nullptr ? p.W[g] : nullptr;
  return affine_combine(w, w != nullptr ? x : nullptr, terms, *p.b[g]);
}

// Output side shared by every cell: c = i⊙u + Σ f_k⊙c_k, h = o⊙tanh(c).
void finish_step(StepTrace& t, std::span<const NodeState> children) {
  t.c = hadamard(t.i, t.u);
  for (std::size_t k = 0; k < t.f.size(); ++k) {
    const Vec& fk = t.f[k];
    const Vec& ck = children[k].c;
    for (std::size_t r = 0; r < t.c.dim(); ++r) t.c[r] += fk[r] * ck[r];
  }
  t.tanh_c = elementwise(t.c, Activation::kTanh);
  t.h = hadamard(t.o, t.tanh_c);
}

struct GatePreGrads {
  Vec dc_total;
  Vec dz[kNumGates];  // f entry unused; see dzf
  std::vector<Vec> dzf;
};

GatePreGrads output_backward(const StepTrace& t, std::span<const NodeState> children,
                             const Vec& dh, const Vec& dc, std::vector<NodeState>& dchildren) {
  const std::size_t d = t.c.dim();
  check_dim("step backward", "dh", dh.dim(), d);
  GatePreGrads g;
  g.dc_total = dc.empty() ? Vec(d) : dc;
  check_dim("step backward", "dc", g.dc_total.dim(), d);
  Vec d_o(d);
  for (std::size_t r = 0; r < d; ++r) {
    g.dc_total[r] += dh[r] * t.o[r] * (1.0 - t.tanh_c[r] * t.tanh_c[r]);
    d_o[r] = dh[r] * t.tanh_c[r];
  }
  g.dz[kOutputGate] = sigmoid_grad(d_o, t.o);
  g.dz[kInputGate] = sigmoid_grad(hadamard(g.dc_total, t.u), t.i);
  g.dz[kUpdate] = tanh_grad(hadamard(g.dc_total, t.i), t.u);
  dchildren.assign(children.size(), NodeState{});
  g.dzf.reserve(t.f.size());
  for (std::size_t k = 0; k < t.f.size(); ++k) {
    g.dzf.push_back(sigmoid_grad(hadamard(g.dc_total, children[k].c), t.f[k]));
    dchildren[k].c = hadamard(g.dc_total, t.f[k]);
    dchildren[k].h = Vec(d);
  }
  return g;
}

}  // namespace

void add_gate_params(ParamSet& ps, const std::string& prefix, const CellShape& s, Rng& rng,
                     const InitOptions& init) {
  if (s.d == 0 || (s.input && s.e == 0) || s.slots == 0) {
    throw std::invalid_argument("cell shape must have positive dimensions");
  }
  for (std::size_t g = 0; g < kNumGates; ++g) {
    if (s.input) ps.add_mat(w_name(prefix, g), s.d, s.e) = init_mat(s.d, s.e, init.scale, rng);
    for (std::size_t k = 0; k < u_blocks(g, s); ++k) {
      if (!u_block_used(g, k, s)) continue;
      ps.add_mat(u_name(prefix, g, k, s), s.d, s.d) = init_mat(s.d, s.d, init.scale, rng);
    }
    ps.add_vec(b_name(prefix, g), s.d).fill(g == kForgetGate ? init.forget_bias : 0.0);
  }
}

GateParams bind_gate_params(ParamSet& ps, const std::string& prefix, const CellShape& s,
                            Slot slot) {
  GateParams p;
  p.shape = s;
  for (std::size_t g = 0; g < kNumGates; ++g) {
    if (s.input) p.W[g] = &ps.mat(w_name(prefix, g), slot);
    p.U[g].assign(u_blocks(g, s), nullptr);
    for (std::size_t k = 0; k < u_blocks(g, s); ++k) {
      if (u_block_used(g, k, s)) p.U[g][k] = &ps.mat(u_name(prefix, g, k, s), slot);
    }
    p.b[g] = &ps.vec(b_name(prefix, g), slot);
  }
  return p;
}

std::size_t gate_param_count(const CellShape& s) {
  std::size_t n = 0;
  for (std::size_t g = 0; g < kNumGates; ++g) {
    if (s.input) n += s.d * s.e;
    for (std::size_t k = 0; k < u_blocks(g, s); ++k) {
      if (u_block_used(g, k, s)) n += s.d * s.d;
    }
    n += s.d;
  }
  return n;
}

NodeState zero_state(std::size_t d) { return NodeState{Vec(d), Vec(d)}; }

StepResult lstm_step(const GateParams& p, const Vec& x, const NodeState& prev) {
  const std::size_t d = p.shape.d;
  if (p.shape.slots != 1) throw DimensionError("lstm_step: cell must have one slot");
  check_input(p, &x, "lstm_step");
  check_dim("lstm_step", "prev h", prev.h.dim(), d);
  check_dim("lstm_step", "prev c", prev.c.dim(), d);

  StepTrace t;
  t.has_input = true;
  t.x = x;
  t.h_sum = prev.h;
  Vec z[kNumGates];
  for (std::size_t g = 0; g < kNumGates; ++g) {
    const MatVecTerm term{*p.U[g][0], prev.h};
    z[g] = affine_combine(p.W[g], &x, std::span(&term, 1), *p.b[g]);
  }
  t.i = elementwise(z[kInputGate], Activation::kSigmoid);
  t.f = {elementwise(z[kForgetGate], Activation::kSigmoid)};
  t.o = elementwise(z[kOutputGate], Activation::kSigmoid);
  t.u = elementwise(z[kUpdate], Activation::kTanh);
  finish_step(t, std::span(&prev, 1));
  NodeState out{t.c, t.h};
  return {std::move(out), std::move(t)};
}

StepResult childsum_step(const GateParams& p, const Vec* x, std::span<const NodeState> children) {
  const std::size_t d = p.shape.d;
  if (p.shape.slots != 1) throw DimensionError("childsum_step: cell must have one slot");
  check_input(p, x, "childsum_step");
  check_children(children, d, "childsum_step");

  StepTrace t;
  t.has_input = x != nullptr;
  if (x != nullptr) t.x = *x;
  t.h_sum = Vec(d);
  for (const auto& ch : children) axpy(1.0, ch.h, t.h_sum);

  for (std::size_t g : {kInputGate, kOutputGate, kUpdate}) {
    const MatVecTerm term{*p.U[g][0], t.h_sum};
    Vec z = gate_preact(p, g, x, std::span(&term, 1));
    Vec a = elementwise(z, g == kUpdate ? Activation::kTanh : Activation::kSigmoid);
    (g == kInputGate ? t.i : g == kOutputGate ? t.o : t.u) = std::move(a);
  }
  // W_f x + b_f is shared by every child's forget gate.
  const Vec f_base = gate_preact(p, kForgetGate, x, {});
  t.f.reserve(children.size());
  for (const auto& ch : children) {
    Vec z = f_base;
    Vec uh = matvec(*p.U[kForgetGate][0], ch.h);
    axpy(1.0, uh, z);
    t.f.push_back(elementwise(z, Activation::kSigmoid));
  }
  finish_step(t, children);
  NodeState out{t.c, t.h};
  return {std::move(out), std::move(t)};
}

StepResult nary_step(const GateParams& p, const Vec* x, std::span<const NodeState> children,
                     TreeKind kind) {
  const std::size_t d = p.shape.d;
  const std::size_t n = p.shape.slots;
  if (children.size() > n) {
    throw DimensionError("nary_step: " + std::to_string(children.size()) +
                         " children exceed N = " + std::to_string(n));
  }
  if (kind == TreeKind::kConstituency && x != nullptr && !children.empty()) {
    throw DimensionError("nary_step: constituency internal node given an input vector");
  }
  check_input(p, x, "nary_step");
  check_children(children, d, "nary_step");

  StepTrace t;
  t.has_input = x != nullptr;
  if (x != nullptr) t.x = *x;

  std::vector<MatVecTerm> terms;
  terms.reserve(children.size());
  for (std::size_t g : {kInputGate, kOutputGate, kUpdate}) {
    terms.clear();
    for (std::size_t l = 0; l < children.size(); ++l) terms.push_back({*p.U[g][l], children[l].h});
    Vec z = gate_preact(p, g, x, terms);
    Vec a = elementwise(z, g == kUpdate ? Activation::kTanh : Activation::kSigmoid);
    (g == kInputGate ? t.i : g == kOutputGate ? t.o : t.u) = std::move(a);
  }
  t.f.reserve(children.size());
  for (std::size_t k = 0; k < children.size(); ++k) {
    terms.clear();
    for (std::size_t l = 0; l < children.size(); ++l) {
      const Mat* u = p.U[kForgetGate][k * n + l];
      if (u != nullptr) terms.push_back({*u, children[l].h});
    }
    t.f.push_back(elementwise(gate_preact(p, kForgetGate, x, terms), Activation::kSigmoid));
  }
  finish_step(t, children);
  NodeState out{t.c, t.h};
  return {std::move(out), std::move(t)};
}

StepGrad childsum_step_backward(const GateParams& p, const GateParams& g, const StepTrace& t,
                                std::span<const NodeState> children, const Vec& dh,
                                const Vec& dc) {
  if (t.f.size() != children.size()) {
    throw std::invalid_argument("childsum_step_backward: trace/children mismatch");
  }
  const std::size_t d = p.shape.d;
  StepGrad out;
  GatePreGrads pg = output_backward(t, children, dh, dc, out.dchildren);

  Vec dh_sum(d);
  if (t.has_input) out.dx = Vec(p.shape.e);
  for (std::size_t gate : {kInputGate, kOutputGate, kUpdate}) {
    const Vec& dz = pg.dz[gate];
    if (t.has_input) {
      add_outer(*g.W[gate], dz, t.x);
      matvec_transposed_acc(*p.W[gate], dz, out.dx);
    }
    add_outer(*g.U[gate][0], dz, t.h_sum);
    axpy(1.0, dz, *g.b[gate]);
    matvec_transposed_acc(*p.U[gate][0], dz, dh_sum);
  }
  for (std::size_t k = 0; k < children.size(); ++k) {
    const Vec& dz = pg.dzf[k];
    if (t.has_input) {
      add_outer(*g.W[kForgetGate], dz, t.x);
      matvec_transposed_acc(*p.W[kForgetGate], dz, out.dx);
    }
    add_outer(*g.U[kForgetGate][0], dz, children[k].h);
    axpy(1.0, dz, *g.b[kForgetGate]);
    Vec& dhk = out.dchildren[k].h;
    dhk = dh_sum;
    matvec_transposed_acc(*p.U[kForgetGate][0], dz, dhk);
  }
  return out;
}

StepGrad lstm_step_backward(const GateParams& p, const GateParams& g, const StepTrace& t,
                            const NodeState& prev, const Vec& dh, const Vec& dc) {
  return childsum_step_backward(p, g, t, std::span(&prev, 1), dh, dc);
}

StepGrad nary_step_backward(const GateParams& p, const GateParams& g, const StepTrace& t,
                            std::span<const NodeState> children, const Vec& dh, const Vec& dc) {
  if (t.f.size() != children.size()) {
    throw std::invalid_argument("nary_step_backward: trace/children mismatch");
  }
  const std::size_t n = p.shape.slots;
  StepGrad out;
  GatePreGrads pg = output_backward(t, children, dh, dc, out.dchildren);

  if (t.has_input) out.dx = Vec(p.shape.e);
  for (std::size_t gate : {kInputGate, kOutputGate, kUpdate}) {
    const Vec& dz = pg.dz[gate];
    if (t.has_input) {
      add_outer(*g.W[gate], dz, t.x);
      matvec_transposed_acc(*p.W[gate], dz, out.dx);
    }
    for (std::size_t l = 0; l < children.size(); ++l) {
      add_outer(*g.U[gate][l], dz, children[l].h);
      matvec_transposed_acc(*p.U[gate][l], dz, out.dchildren[l].h);
    }
    axpy(1.0, dz, *g.b[gate]);
  }
  for (std::size_t k = 0; k < children.size(); ++k) {
    const Vec& dz = pg.dzf[k];
    if (t.has_input) {
      add_outer(*g.W[kForgetGate], dz, t.x);
      matvec_transposed_acc(*p.W[kForgetGate], dz, out.dx);
    }
    for (std::size_t l = 0; l < children.size(); ++l) {
      const std::size_t block = k * n + l;
      if (p.U[kForgetGate][block] == nullptr) continue;
      add_outer(*g.U[kForgetGate][block], dz, children[l].h);
      matvec_transposed_acc(*p.U[kForgetGate][block], dz, out.dchildren[l].h);
    }
    axpy(1.0, dz, *g.b[kForgetGate]);
  }
  return out;
}

// ---- sequences ----

namespace {

Vec layer_output(const SequenceTrace& tr, std::size_t layer, std::size_t pos) {
  const Vec& fwd = tr.states[layer][0][pos].h;
  if (!tr.mode.bidirectional) return fwd;
  return concat(fwd, tr.states[layer][1][pos].h);
}

}  // namespace

SequenceTrace run_sequence(std::span<const GateParams> layers, std::span<const Vec> xs,
                           SequenceMode mode) {
  if (xs.empty()) throw std::invalid_argument("run_sequence: empty sequence");
  if (mode.layers == 0 || layers.size() != mode.layers) {
    throw std::invalid_argument("run_sequence: need one cell per layer");
  }
  const std::size_t len = xs.size();
  SequenceTrace tr;
  tr.mode = mode;
  tr.length = len;
  tr.steps.resize(mode.layers);
  tr.states.resize(mode.layers);
  tr.inputs.resize(mode.layers);
  const std::size_t directions = mode.bidirectional ? 2 : 1;

  for (std::size_t l = 0; l < mode.layers; ++l) {
    auto& inputs = tr.inputs[l];
    inputs.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      inputs.push_back(l == 0 ? xs[t] : layer_output(tr, l - 1, t));
    }
    const GateParams& cell = layers[l];
    for (std::size_t dir = 0; dir < directions; ++dir) {
      auto& steps = tr.steps[l][dir];
      auto& states = tr.states[l][dir];
      steps.resize(len);
      states.resize(len);
      NodeState prev = zero_state(cell.shape.d);
      for (std::size_t s = 0; s < len; ++s) {
        const std::size_t t = dir == 0 ? s : len - 1 - s;
        auto [state, trace] = lstm_step(cell, inputs[t], prev);
        steps[t] = std::move(trace);
        states[t] = state;
        prev = std::move(state);
      }
    }
  }
  tr.outputs.reserve(len);
  for (std::size_t t = 0; t < len; ++t) tr.outputs.push_back(layer_output(tr, mode.layers - 1, t));
  return tr;
}

std::vector<Vec> backward_sequence(std::span<const GateParams> layers,
                                   std::span<const GateParams> grads, const SequenceTrace& tr,
                                   std::span<const Vec> d_outputs) {
  const std::size_t len = tr.length;
  if (d_outputs.size() != len) throw std::invalid_argument("backward_sequence: need one gradient per position");
  if (tr.steps.size() != tr.mode.layers || layers.size() != tr.mode.layers ||
      grads.size() != tr.mode.layers) {
    throw std::invalid_argument("backward_sequence: missing trace entries");
  }
  const std::size_t directions = tr.mode.bidirectional ? 2 : 1;
  std::vector<Vec> upstream(d_outputs.begin(), d_outputs.end());

  for (std::size_t l = tr.mode.layers; l-- > 0;) {
    const GateParams& cell = layers[l];
    const std::size_t d = cell.shape.d;
    std::vector<Vec> d_inputs(len, Vec(tr.inputs[l][0].dim()));
    for (std::size_t dir = 0; dir < directions; ++dir) {
      const auto& steps = tr.steps[l][dir];
      const auto& states = tr.states[l][dir];
      if (steps.size() != len) throw std::invalid_argument("backward_sequence: missing trace entries");
      Vec dh_carry(d);
      Vec dc_carry(d);
      const NodeState zero = zero_state(d);
      for (std::size_t s = 0; s < len; ++s) {
        // Reverse of the processing order.
        const std::size_t t = dir == 0 ? len - 1 - s : s;
        Vec dh = dh_carry;
        if (!upstream[t].empty()) {
          check_dim("backward_sequence", "d_output", upstream[t].dim(), d * directions);
          for (std::size_t r = 0; r < d; ++r) dh[r] += upstream[t][dir * d + r];
        }
        const bool has_prev = dir == 0 ? t > 0 : t + 1 < len;
        const NodeState& prev = has_prev ? states[dir == 0 ? t - 1 : t + 1] : zero;
        StepGrad sg = lstm_step_backward(cell, grads[l], steps[t], prev, dh, dc_carry);
        dh_carry = std::move(sg.dchildren[0].h);
        dc_carry = std::move(sg.dchildren[0].c);
        axpy(1.0, sg.dx, d_inputs[t]);
      }
    }
    upstream = std::move(d_inputs);
  }
  return upstream;
}

Vec sequence_representation(const SequenceTrace& tr) {
  const std::size_t top = tr.mode.layers - 1;
  const Vec& fwd = tr.states[top][0][tr.length - 1].h;
  if (!tr.mode.bidirectional) return fwd;
  return concat(fwd, tr.states[top][1][0].h);
}

std::vector<Vec> sequence_representation_grad(const SequenceTrace& tr, const Vec& d_rep) {
  const std::size_t top = tr.mode.layers - 1;
  const std::size_t d = tr.states[top][0][0].h.dim();
  const std::size_t width = tr.mode.bidirectional ? 2 * d : d;
  check_dim("sequence_representation_grad", "d_rep", d_rep.dim(), width);
  std::vector<Vec> out(tr.length);
  if (!tr.mode.bidirectional) {
    out[tr.length - 1] = d_rep;
    return out;
  }
  out[tr.length - 1] = Vec(width);
  if (out[0].empty()) out[0] = Vec(width);
  for (std::size_t r = 0; r < d; ++r) {
    out[tr.length - 1][r] += d_rep[r];
    out[0][d + r] += d_rep[d + r];
  }
  return out;
}

// ---- trees ----

TreeTrace run_tree(const GateParams& p, const Tree& tree, std::span<const Vec> token_vectors,
                   TreeVariant variant) {
  if (token_vectors.size() != tree.length()) {
    throw DimensionError("run_tree: need one vector per token");
  }
  TreeTrace tr;
  tr.variant = variant;
  tr.states.resize(tree.size());
  tr.steps.resize(tree.size());
  std::vector<NodeState> children;
  for (std::size_t id : tree.post_order()) {
    const TreeNode& node = tree.node(id);
    children.clear();
    for (std::size_t c : node.children) children.push_back(tr.states[c]);
    const Vec* x = node.token ? &token_vectors[*node.token] : nullptr;
    auto [state, trace] = variant == TreeVariant::kChildSum
                              ? childsum_step(p, x, children)
                              : nary_step(p, x, children, tree.kind());
    tr.states[id] = std::move(state);
    tr.steps[id] = std::move(trace);
  }
  return tr;
}

TreeTrace run_tree(const GateParams& p, const Tree& tree, const EmbeddingTable& emb,
                   TreeVariant variant) {
  if (tree.word_ids().size() != tree.length()) {
    throw std::invalid_argument("run_tree: tree has not been indexed against a vocabulary");
  }
  std::vector<Vec> xs;
  xs.reserve(tree.length());
  for (std::size_t id : tree.word_ids()) xs.push_back(emb.lookup(id));
  return run_tree(p, tree, xs, variant);
}

std::vector<Vec> backward_tree(const GateParams& p, const GateParams& g, const Tree& tree,
                               const TreeTrace& tr, std::span<const Vec> dh,
                               std::span<const Vec> dc) {
  const std::size_t n = tree.size();
  if (tr.steps.size() != n || tr.states.size() != n) {
    throw std::invalid_argument("backward_tree: missing trace entries");
  }
  if (dh.size() != n) throw std::invalid_argument("backward_tree: need one dh slot per node");
  if (!dc.empty() && dc.size() != n) throw std::invalid_argument("backward_tree: dc size");
  const std::size_t d = p.shape.d;
  std::vector<Vec> dh_acc(n, Vec(d));
  std::vector<Vec> dc_acc(n, Vec(d));
  for (std::size_t id = 0; id < n; ++id) {
    if (!dh[id].empty()) axpy(1.0, dh[id], dh_acc[id]);
    if (!dc.empty() && !dc[id].empty()) axpy(1.0, dc[id], dc_acc[id]);
  }
  std::vector<Vec> d_tokens(tree.length(), p.shape.input ? Vec(p.shape.e) : Vec());
  std::vector<NodeState> children;
  const auto& order = tree.post_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t id = *it;
    const TreeNode& node = tree.node(id);
    children.clear();
    for (std::size_t c : node.children) children.push_back(tr.states[c]);
    StepGrad sg = tr.variant == TreeVariant::kChildSum
                      ? childsum_step_backward(p, g, tr.steps[id], children, dh_acc[id], dc_acc[id])
                      : nary_step_backward(p, g, tr.steps[id], children, dh_acc[id], dc_acc[id]);
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      axpy(1.0, sg.dchildren[k].h, dh_acc[node.children[k]]);
      axpy(1.0, sg.dchildren[k].c, dc_acc[node.children[k]]);
    }
    if (node.token && !sg.dx.empty()) axpy(1.0, sg.dx, d_tokens[*node.token]);
  }
  return d_tokens;
}

}  // namespace treelstm
