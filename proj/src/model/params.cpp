#include "hvac/model/params.hpp"

#include <cmath>

#include "hvac/error.hpp"
#include "hvac/nn/adam.hpp"
#include "hvac/rng.hpp"

namespace hvac::model {

nn::ParamLayout make_layout(const Architecture& a) {
  require(a.channels >= 1 && a.hidden >= 1 && a.head_hidden >= 1, "architecture sizes must be >= 1");
  require(a.kernel >= 1 && a.kernel % 2 == 1, "kernel width must be odd");
  nn::ParamLayout l;
  const int in_ch[4] = {3, a.channels, a.channels, a.channels};
  const int out_ch[4] = {a.channels, a.channels, a.channels, 2};
  for (int i = 0; i < 4; ++i) {
    l.add(seg::conv_w[i], out_ch[i], static_cast<nn::Index>(a.kernel) * in_ch[i]);
    l.add(seg::conv_b[i], out_ch[i], 1);
  }
  const int input = kActionCodes + 2;
  l.add(seg::gru_wx, 3 * a.hidden, input);
  l.add(seg::gru_wh, 3 * a.hidden, a.hidden);
  l.add(seg::gru_b, 3 * a.hidden, 1);
  l.add(seg::head1_w, a.head_hidden, a.hidden);
  l.add(seg::head1_b, a.head_hidden, 1);
  l.add(seg::head2_w, 1, a.head_hidden);
  l.add(seg::head2_b, 1, 1);
  return l;
}

ModelParams make_model(const Architecture& arch, std::uint64_t seed) {
  ModelParams p;
  p.arch = arch;
  p.seed = seed;
  p.weights = nn::ParamVector(make_layout(arch));
  CounterRng rng = CounterRng(seed).split(0x1417);
  nn::init_uniform(p.weights, rng);
  p.weights.matrix(seg::conv_w[3]).setZero();
  auto head_b = p.weights.matrix(seg::conv_b[3]);
  head_b(0, 0) = 0.0;
  head_b(1, 0) = std::log(std::expm1(1.0));  // softplus^-1(1)
  return p;
}

}  // namespace hvac::model
