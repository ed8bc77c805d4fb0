#pragma once

#include <span>
#include <string>
#include <vector>

#include "framespan/autodiff.hpp"
#include "framespan/params.hpp"

namespace framespan {

// Weights of one LSTM direction. All four gates take [x; h_prev]; the forget
// gate bias starts at 1.0 so early training does not wipe the cell state.
struct LstmParams {
  Parameter& wix;
  Parameter& wih;
  Parameter& bi;
  Parameter& wfx;
  Parameter& wfh;
  Parameter& bf;
  Parameter& wox;
  Parameter& woh;
  Parameter& bo;
  Parameter& wcx;
  Parameter& wch;
  Parameter& bc;
  int input_dim;
  int hidden_dim;

  static LstmParams create(ParameterStore& store, const std::string& prefix, int input_dim,
                           int hidden_dim, Rng& rng) {
    auto mat = [&](const char* nm) -> Parameter& {
      return store.add_uniform(prefix + nm, {hidden_dim, input_dim}, rng);
    };
    auto rec = [&](const char* nm) -> Parameter& {
      return store.add_uniform(prefix + nm, {hidden_dim, hidden_dim}, rng);
    };
    auto bias = [&](const char* nm) -> Parameter& { return store.add(prefix + nm, {hidden_dim}); };
    Parameter& wix = mat("/Wix");
    Parameter& wih = rec("/Wih");
    Parameter& bi = bias("/bi");
    Parameter& wfx = mat("/Wfx");
    Parameter& wfh = rec("/Wfh");
    Parameter& bf = bias("/bf");
    for (double& x : bf.value.v) x = 1.0;
    Parameter& wox = mat("/Wox");
    Parameter& woh = rec("/Woh");
    Parameter& bo = bias("/bo");
    Parameter& wcx = mat("/Wcx");
    Parameter& wch = rec("/Wch");
    Parameter& bc = bias("/bc");
    return {wix, wih, bi, wfx, wfh, bf, wox, woh, bo, wcx, wch, bc, input_dim, hidden_dim};
  }
};

struct LstmState {
  Node h;
  Node c;
};

inline LstmState lstm_initial(Graph& g, const LstmParams& p) {
  Node z = g.input(Tensor({p.hidden_dim}));
  return {z, z};
}

inline LstmState lstm_step(Graph& g, const LstmParams& p, Node x, const LstmState& prev) {
  auto affine = [&](Parameter& wx, Parameter& wh, Parameter& b) {
    return g.add(g.add(g.matvec(g.parameter(wx), x), g.matvec(g.parameter(wh), prev.h)),
                 g.parameter(b));
  };
  Node i = g.logistic(affine(p.wix, p.wih, p.bi));
  Node f = g.logistic(affine(p.wfx, p.wfh, p.bf));
  Node o = g.logistic(affine(p.wox, p.woh, p.bo));
  Node u = g.tanh(affine(p.wcx, p.wch, p.bc));
  Node c = g.add(g.cmult(f, prev.c), g.cmult(i, u));
  Node h = g.cmult(o, g.tanh(c));
  return {h, c};
}

// Hidden states for the whole sequence, in input order.
inline std::vector<Node> lstm_run(Graph& g, const LstmParams& p, std::span<const Node> xs) {
  std::vector<Node> hs;
  hs.reserve(xs.size());
  LstmState st = lstm_initial(g, p);
  for (Node x : xs) {
    st = lstm_step(g, p, x, st);
    hs.push_back(st.h);
  }
  return hs;
}

}  // namespace framespan
