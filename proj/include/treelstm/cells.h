#ifndef TREELSTM_CELLS_H_
#define TREELSTM_CELLS_H_

// Forward and backward passes for chain LSTMs (uni/bidirectional,
// multilayer), Child-Sum Tree-LSTMs and N-ary Tree-LSTMs.
//
// Gates are indexed i, f, o, u. Parameters live in a ParamSet; a
// GateParams is a non-owning view of either the values or the gradients of
// one cell, so the same struct drives the forward pass and receives the
// backward pass.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treelstm/params.h"
#include "treelstm/tensor.h"
#include "treelstm/tree.h"

namespace treelstm {

class EmbeddingTable;
class Rng;

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kUpdate = 3 };
inline constexpr std::size_t kNumGates = 4;

struct CellShape {
  std::size_t d = 0;      // memory dimension
  std::size_t e = 0;      // input dimension (ignored when !input)
  std::size_t slots = 1;  // N for N-ary cells; 1 for chain / Child-Sum
  bool offdiag = true;    // N-ary forget gates see all siblings
  bool input = true;      // cell has W matrices
};

struct GateParams {
  CellShape shape;
  std::array<Mat*, kNumGates> W{};
  // U[i|o|u] has `slots` blocks; U[f] has slots×slots blocks indexed
  // k*slots + l (null off-diagonal blocks when !offdiag).
  std::array<std::vector<Mat*>, kNumGates> U;
  std::array<Vec*, kNumGates> b{};
};

struct InitOptions {
  double scale = 0.05;       // weights uniform on [-scale, scale]
  double forget_bias = 1.0;  // biases are zero except the forget gate
};

// Registers "<prefix>.W_i", "<prefix>.U_f.0.1", "<prefix>.b_o", ... and
// initializes them.
void add_gate_params(ParamSet& ps, const std::string& prefix, const CellShape& shape,
                     Rng& rng, const InitOptions& init = {});
GateParams bind_gate_params(ParamSet& ps, const std::string& prefix, const CellShape& shape,
                            Slot slot);
// Composition-function scalar count of one cell.
std::size_t gate_param_count(const CellShape& shape);

struct NodeState {
  Vec c;
  Vec h;
};
NodeState zero_state(std::size_t d);

// Cached activations of one unit.
struct StepTrace {
  bool has_input = false;
  Vec x;
  Vec i, o, u;
  std::vector<Vec> f;  // one per present child
  Vec h_sum;           // Σ child h (Child-Sum and chain steps)
  Vec c, tanh_c, h;
};

using StepResult = std::pair<NodeState, StepTrace>;

StepResult lstm_step(const GateParams& p, const Vec& x, const NodeState& prev);
// `x` may be null for cells without input matrices.
StepResult childsum_step(const GateParams& p, const Vec* x, std::span<const NodeState> children);
// Children fill slots 0..m-1; slots m..N-1 are absent (zero h, zero c).
// With kind == kConstituency, x must be null unless the node is a leaf.
StepResult nary_step(const GateParams& p, const Vec* x, std::span<const NodeState> children,
                     TreeKind kind = TreeKind::kDependency);

struct StepGrad {
  Vec dx;                           // empty when the step had no input
  std::vector<NodeState> dchildren;  // d loss / d (child c, child h)
};

// Accumulate parameter gradients into `g` and return input/child gradients
// given dL/dh and dL/dc of the unit.
StepGrad lstm_step_backward(const GateParams& p, const GateParams& g, const StepTrace& t,
                            const NodeState& prev, const Vec& dh, const Vec& dc);
StepGrad childsum_step_backward(const GateParams& p, const GateParams& g, const StepTrace& t,
                                std::span<const NodeState> children, const Vec& dh,
                                const Vec& dc);
StepGrad nary_step_backward(const GateParams& p, const GateParams& g, const StepTrace& t,
                            std::span<const NodeState> children, const Vec& dh, const Vec& dc);

// ---- sequences ----

struct SequenceMode {
  std::size_t layers = 1;
  bool bidirectional = false;
};

struct SequenceTrace {
  SequenceMode mode;
  std::size_t length = 0;
  // [layer][direction][position]; direction 0 runs left to right, 1 right
  // to left. Both directions of a layer share parameters.
  std::vector<std::array<std::vector<StepTrace>, 2>> steps;
  std::vector<std::array<std::vector<NodeState>, 2>> states;
  std::vector<std::vector<Vec>> inputs;  // [layer][position]
  // Top-layer hidden per position: h, or [h_forward; h_backward].
  std::vector<Vec> outputs;
};

// layers[l] is the cell for layer l; layer l>0 reads the (concatenated)
// hidden states of layer l-1. Throws on an empty sequence.
SequenceTrace run_sequence(std::span<const GateParams> layers, std::span<const Vec> xs,
                           SequenceMode mode);

// d_outputs[t] is dL/d outputs[t] (empty Vec = no gradient). Returns dL/dx
// per position.
std::vector<Vec> backward_sequence(std::span<const GateParams> layers,
                                   std::span<const GateParams> grads, const SequenceTrace& trace,
                                   std::span<const Vec> d_outputs);

// Sentence representation of a sequence model: the final hidden state, or
// [h_forward(T-1); h_backward(0)] for bidirectional models.
Vec sequence_representation(const SequenceTrace& trace);
// Inverse map of a gradient on the representation onto d_outputs-style
// per-position gradients for the top layer.
std::vector<Vec> sequence_representation_grad(const SequenceTrace& trace, const Vec& d_rep);

// ---- trees ----

enum class TreeVariant { kChildSum, kNary };

struct TreeTrace {
  TreeVariant variant = TreeVariant::kChildSum;
  std::vector<NodeState> states;  // by node id
  std::vector<StepTrace> steps;   // by node id
};

// Bottom-up evaluation. Nodes with a token receive token_vectors[token];
// constituency internal nodes receive no input.
TreeTrace run_tree(const GateParams& p, const Tree& tree, std::span<const Vec> token_vectors,
                   TreeVariant variant);
// Same, with token vectors looked up by tree.word_ids().
TreeTrace run_tree(const GateParams& p, const Tree& tree, const EmbeddingTable& emb,
                   TreeVariant variant);

// dh[node] / dc[node]: upstream gradients (empty Vec = none; dc may be
// empty altogether). Returns dL/d token vector per token index.
std::vector<Vec> backward_tree(const GateParams& p, const GateParams& g, const Tree& tree,
                               const TreeTrace& trace, std::span<const Vec> dh,
                               std::span<const Vec> dc = {});

}  // namespace treelstm

#endif  // TREELSTM_CELLS_H_
