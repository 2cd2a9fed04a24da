#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "hvac/data/grid.hpp"
#include "hvac/error.hpp"
#include "hvac/model/checkpoint.hpp"
#include "hvac/model/elbo.hpp"
#include "hvac/model/model.hpp"
#include "hvac/model/train.hpp"

using namespace hvac;
using namespace hvac::model;
using Eigen::Index;

namespace {

data::Dataset small_dataset(std::size_t n, std::uint64_t seed, int length = 300) {
  data::GridSpec g;
  g.subset_size = n;
  g.sequence_length = length;
  g.session_minutes = length * g.sequences_per_session;
  return data::generate_dataset(g, seed);
}

ModelParams randomized(std::uint64_t seed, double scale = 0.3) {
  ModelParams p = make_model({}, seed);
  CounterRng rng(seed + 100);
  for (Index i = 0; i < p.weights.values.size(); ++i) p.weights.values(i) += scale * (2.0 * rng.uniform() - 1.0);
  return p;
}

/// Plain-double evaluation of the negative ELBO of one batch from its pieces.
double neg_elbo_oracle(const Eigen::RowVectorXd& mu, const Eigen::RowVectorXd& sig, const Eigen::MatrixXd& pred,
                       const Eigen::RowVectorXd& obs, const Eigen::RowVectorXd& sigma_obs, double s, Index T,
                       Index B) {
  double total = 0.0;
  for (Index b = 0; b < B; ++b) {
    const double so = sigma_obs(b);
    double seq = 0.0;
    for (Index tau = 1; tau < T; ++tau) {
      const Index c = tau * B + b;
      const double m = mu(c), sg = sig(c), pr = pred(0, c - B);
      seq += -std::log(sg) + ((obs(c) - m) * (obs(c) - m) + sg * sg) / (2 * so * so) +
             (sg * sg + (m - pr) * (m - pr)) / (2 * s * s);
    }
    const double t = static_cast<double>(T);
    seq += 0.5 * t * std::log(2 * std::numbers::pi) + t * std::log(so) + t * std::log(s) - 0.5 * t;
    total += seq;
  }
  return total;
}

}  // namespace

TEST_CASE("action encoding") {
  sim::ControlState c;
  CHECK(encode_action(c) == 0);
  c.a_h = true;
  c.a_vent = true;
  CHECK(encode_action(c) == 3);
  sim::ControlState ac;
  ac.a_ac = true;
  CHECK(encode_action(ac) == 2);
  sim::ControlState vent;
  vent.a_vent = true;
  CHECK(encode_action(vent) == 1);
  const std::vector<sim::ControlState> v{c, ac, vent};
  CHECK(encode_actions(v) == std::vector<int>{3, 2, 1});
}

TEST_CASE("normalization round trip") {
  const Normalization n;
  for (double t = 250.0; t < 345.0; t += 0.37) CHECK(std::abs(n.denormalize(n.normalize(t)) - t) <= 1e-9);
}

TEST_CASE("untrained denoiser is the identity with sigma at its unit") {
  const auto ds = small_dataset(4, 1);
  const ModelParams p = make_model({}, 5);
  for (const auto& s : ds.sequences) {
    const DenoiserOutput out = denoise(s.t_obs, s.t_out, s.control, p);
    CHECK(out.mu_tilde == s.t_obs);
    for (double sg : out.sigma_tilde) CHECK(sg == doctest::Approx(kSigmaUnit).epsilon(1e-12));
  }
}

TEST_CASE("denoiser outputs stay positive and finite for random weights") {
  const auto ds = small_dataset(6, 2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ModelParams p = randomized(seed, 1.0);
    for (const auto& s : ds.sequences) {
      const DenoiserOutput out = denoise(s.t_obs, s.t_out, s.control, p);
      for (std::size_t i = 0; i < out.mu_tilde.size(); ++i) {
        CHECK(std::isfinite(out.mu_tilde[i]));
        CHECK(out.sigma_tilde[i] > 0.0);
      }
    }
  }
  const ModelParams p = make_model();
  const std::vector<double> a(3, 290.0), b(4, 280.0);
  const std::vector<sim::ControlState> c(3);
  CHECK_THROWS_AS(denoise(a, b, c, p), ValidationError);
  std::vector<double> bad(3, 290.0);
  bad[1] = std::nan("");
  CHECK_THROWS_AS(denoise(bad, a, c, p), ValidationError);
}

TEST_CASE("predict_step: zero head keeps the temperature, hidden state moves") {
  ModelParams p = randomized(3);
  p.weights.matrix(seg::head2_w).setZero();
  p.weights.matrix(seg::head2_b).setZero();
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(3, 0.1);
  for (int code = 0; code < 4; ++code) {
    const PredictStep r = predict_step(297.3, code, 265.0, h, p);
    CHECK(r.t_next == 297.3);
    CHECK((r.h_next - h).norm() > 1e-6);
  }
  CHECK_THROWS_AS(predict_step(297.3, 4, 265.0, h, p), ValidationError);
  CHECK_THROWS_AS(predict_step(297.3, 0, 265.0, Eigen::VectorXd::Zero(2), p), ValidationError);
}

TEST_CASE("rollout: horizon 0 and split invariance") {
  const auto ds = small_dataset(20, 3);
  const ModelParams p = randomized(4);
  const auto& s = ds.sequences[0];
  const data::Sequence hist = s.slice(0, 100);
  const PredictionResult empty = rollout(hist, {}, {}, 0, p);
  CHECK(empty.t_pred.empty());
  CHECK(empty.denoised.mu_tilde.size() == 100);
  CHECK_THROWS_AS(rollout(hist, {}, {}, 3, p), ValidationError);

  CounterRng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto& seq = ds.sequences[rng.below(ds.size())];
    const int L = 10 + static_cast<int>(rng.below(100));
    const int h1 = static_cast<int>(rng.below(60));
    const int h2 = 1 + static_cast<int>(rng.below(60));
    const data::Sequence history = seq.slice(0, L);
    const std::span<const sim::ControlState> fc(seq.control.data() + L, h1 + h2);
    const std::span<const double> ft(seq.t_out.data() + L, h1 + h2);
    const PredictionResult whole = rollout(history, fc, ft, h1 + h2, p);
    RolloutState st;
    const PredictionResult first = rollout(history, fc.first(h1), ft.first(h1), h1, p, &st);
    const std::vector<double> rest = rollout_continue(st, fc.subspan(h1), ft.subspan(h1), p);
    std::vector<double> joined = first.t_pred;
    joined.insert(joined.end(), rest.begin(), rest.end());
    CHECK(joined == whole.t_pred);
    CHECK(whole.trust_halfwidth.size() == whole.t_pred.size());
    CHECK(whole.trust_halfwidth.front() == 2.0 * whole.denoised.sigma_tilde.back());
  }
}

TEST_CASE("batched and single-sequence rollouts agree") {
  const auto ds = small_dataset(5, 6);
  const ModelParams p = randomized(7);
  std::vector<data::Sequence> hist;
  for (const auto& s : ds.sequences) hist.push_back(s.slice(0, 50));
  std::vector<const data::Sequence*> ptrs;
  for (const auto& h : hist) ptrs.push_back(&h);
  RolloutState st = warm_start(p, make_batch(ptrs));
  Eigen::MatrixXi codes(5, 20);
  Eigen::MatrixXd tout(5, 20);
  for (Index j = 0; j < 5; ++j)
    for (Index k = 0; k < 20; ++k) {
      codes(j, k) = encode_action(ds.sequences[j].control[50 + k]);
      tout(j, k) = ds.sequences[j].t_out[50 + k];
    }
  const Eigen::MatrixXd pred = advance(p, st, codes, tout);
  for (Index j = 0; j < 5; ++j) {
    const auto& s = ds.sequences[j];
    const PredictionResult r = rollout(hist[j], std::span(s.control).subspan(50, 20), std::span(s.t_out).subspan(50, 20), 20, p);
    for (Index k = 0; k < 20; ++k) CHECK(r.t_pred[k] == doctest::Approx(pred(j, k)).epsilon(1e-12));
  }
}

TEST_CASE("ELBO head matches the plain-double oracle") {
  CounterRng rng(31);
  const Index T = 7, B = 3;
  Eigen::RowVectorXd mu(T * B), sig(T * B), obs(T * B), so(B);
  Eigen::MatrixXd pred(1, (T - 1) * B);
  for (Index i = 0; i < T * B; ++i) {
    obs(i) = 290.0 + rng.normal();
    mu(i) = obs(i) + 0.1 * rng.normal();
    sig(i) = 0.05 + 0.2 * rng.uniform();
  }
  for (Index i = 0; i < pred.size(); ++i) pred(0, i) = mu(i + B) + 0.05 * rng.normal();
  so << 0.1, 0.25, 0.01;
  nn::Tape tape;
  const nn::Var loss = neg_elbo_head(tape, tape.constant(mu), tape.constant(sig), tape.constant(pred), obs, so, 0.05, T, B);
  CHECK(tape.scalar(loss) == doctest::Approx(neg_elbo_oracle(mu, sig, pred, obs, so, 0.05, T, B)).epsilon(1e-12));

  // sigma_tilde = sigma, mu_tilde = t_obs and a perfect predictor
  const double sigma = 0.2, s = 0.05;
  Eigen::RowVectorXd o1(T), m1(T), s1 = Eigen::RowVectorXd::Constant(T, sigma), so1(1);
  for (Index i = 0; i < T; ++i) o1(i) = m1(i) = 295.0 + 0.3 * i;
  Eigen::MatrixXd p1 = m1.tail(T - 1);
  so1 << sigma;
  nn::Tape t2;
  const double got = t2.scalar(neg_elbo_head(t2, t2.constant(m1), t2.constant(s1), t2.constant(p1), o1, so1, s, T, 1));
  const double t = static_cast<double>(T);
  const double closed = (t - 1) * (-std::log(sigma) + 0.5 + sigma * sigma / (2 * s * s)) +
                        0.5 * t * std::log(2 * std::numbers::pi) + t * std::log(sigma) + t * std::log(s) - 0.5 * t;
  CHECK(got == doctest::Approx(closed).epsilon(1e-12));

  nn::Tape t3;
  CHECK_THROWS_AS(neg_elbo_head(t3, t3.constant(m1.head(1)), t3.constant(s1.head(1)), t3.constant(Eigen::MatrixXd(1, 0)),
                                o1.head(1), so1, s, 1, 1),
                  ValidationError);
  Eigen::RowVectorXd bad(1);
  bad << 0.0;
  CHECK_THROWS_AS(neg_elbo_head(t3, t3.constant(m1), t3.constant(s1), t3.constant(p1), o1, bad, s, T, 1), ValidationError);
}

TEST_CASE("full ELBO graph gradient against central differences") {
  const auto ds = small_dataset(8, 9, 10);
  CounterRng rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    ModelParams p = randomized(50 + trial, 0.02);
    std::vector<const data::Sequence*> ptrs{&ds.sequences[2 * trial], &ds.sequences[2 * trial + 1]};
    const WindowBatch b = make_batch(ptrs);
    const Eigen::RowVectorXd so = batch_sigma_obs(ptrs, 0.1);
    const Eigen::RowVectorXd eps = draw_eps(rng, b.length, b.batch);
    const LossAndGrad lg = elbo_loss_and_grad(p, b, so, eps);
    double worst = 0.0;
    const double h = 1e-4;  // the summed loss is O(1e3); smaller steps hit roundoff
    for (Index i = 0; i < p.weights.values.size(); ++i) {
      const double saved = p.weights.values(i);
      p.weights.values(i) = saved + h;
      const double up = elbo_loss_and_grad(p, b, so, eps).loss;
      p.weights.values(i) = saved - h;
      const double down = elbo_loss_and_grad(p, b, so, eps).loss;
      p.weights.values(i) = saved;
      const double fd = (up - down) / (2 * h);
      const double tol = 1e-4 * std::max(std::abs(fd), std::abs(lg.grad(i))) + 1e-7;
      worst = std::max(worst, std::abs(fd - lg.grad(i)) / tol);
    }
    CHECK(worst <= 1.0);
  }
}

TEST_CASE("ELBO additivity and the zero-noise path") {
  const auto ds = small_dataset(4, 10, 20);
  const ModelParams p = randomized(11, 0.2);
  CounterRng rng(3);
  std::vector<const data::Sequence*> one{&ds.sequences[0]};
  std::vector<const data::Sequence*> two{&ds.sequences[0], &ds.sequences[0]};
  const WindowBatch b1 = make_batch(one);
  const WindowBatch b2 = make_batch(two);
  const Eigen::RowVectorXd e1 = draw_eps(rng, b1.length, 1);
  Eigen::RowVectorXd e2(2 * b1.length);
  for (Index t = 0; t < b1.length; ++t) e2(2 * t) = e2(2 * t + 1) = e1(t);
  const double l1 = elbo_loss_and_grad(p, b1, batch_sigma_obs(one, 0.1), e1).loss;
  const double l2 = elbo_loss_and_grad(p, b2, batch_sigma_obs(two, 0.1), e2).loss;
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));

  // eps = 0 feeds mu_tilde itself to the predictor: a deterministic loss
  const Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(b1.length);
  nn::Tape t1(p.weights);
  const ElboGraph g = build_elbo(t1, p, b1, batch_sigma_obs(one, 0.1), zero);
  const double a = t1.scalar(g.loss);
  CHECK(elbo_loss_and_grad(p, b1, batch_sigma_obs(one, 0.1), zero).loss == a);
  // the predictor inputs equal mu exactly: rebuild the predictions by hand
  RolloutState st;
  const data::Sequence& s = ds.sequences[0];
  const DenoiserOutput den = denoise(s.t_obs, s.t_out, s.control, p);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p.arch.hidden);
  const Eigen::MatrixXd& pred = t1.value(g.pred);
  for (Index tau = 0; tau + 1 < b1.length; ++tau) {
    const PredictStep r = predict_step(den.mu_tilde[tau], encode_action(s.control[tau]), s.t_out[tau], h, p);
    h = r.h_next;
    CHECK(r.t_next == doctest::Approx(pred(0, tau)).epsilon(1e-13));
  }

  CounterRng n1(5), n2(5);
  const std::span<const data::Sequence> batch(ds.sequences.data(), 2);
  CHECK(elbo_loss(batch, p, n1) == elbo_loss(batch, p, n2));
}

TEST_CASE("training: lr 0 is a no-op, loss decreases, errors") {
  const auto ds = small_dataset(100, 12);
  TrainConfig cfg;
  cfg.steps = 3;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.0;
  const ModelParams init = make_model({}, 1);
  const ModelParams same = train(ds, cfg, init);
  CHECK(same.weights.values == init.weights.values);

  std::vector<double> improvements;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    TrainConfig c;
    c.steps = 500;
    c.batch_size = 16;
    c.learning_rate = 1e-3;
    c.seed = seed;
    std::vector<TrainLogEntry> log;
    train(ds, c, make_model({}, seed), &log);
    REQUIRE(log.size() == 500);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 20; ++i) {
      head += log[i].loss;
      tail += log[480 + i].loss;
    }
    improvements.push_back(head - tail);
  }
  std::sort(improvements.begin(), improvements.end());
  CHECK(improvements[1] > 0.0);

  CHECK_THROWS_AS(train(data::Dataset{}, cfg, init), ValidationError);
  ModelParams blown = make_model({}, 2);
  blown.weights.matrix(seg::conv_b[3])(1, 0) = -1e6;  // sigma underflows, log diverges
  TrainConfig one;
  one.steps = 1;
  one.batch_size = 4;
  CHECK_THROWS_AS(train(ds, one, blown), RuntimeError);
}

TEST_CASE("unlabelled data falls back to the median denoiser sigma") {
  auto ds = small_dataset(10, 13);
  for (auto& s : ds.sequences) s.noise_std = std::nan("");
  TrainConfig cfg;
  cfg.steps = 1;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.0;
  const ModelParams out = train(ds, cfg, make_model({}, 1));
  CHECK(out.sigma_obs == doctest::Approx(kSigmaUnit).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip, tampering and versioning") {
  ModelParams p = randomized(21);
  p.sigma_obs = 0.137;
  p.s_process = 0.042;
  p.seed = 99;
  std::stringstream a;
  save_checkpoint(p, a);
  const std::string text = a.str();
  std::istringstream in(text);
  const ModelParams q = load_checkpoint(in);
  CHECK(q.weights.values == p.weights.values);
  CHECK(q.weights.layout == p.weights.layout);
  CHECK(q.norm == p.norm);
  CHECK(q.arch == p.arch);
  CHECK(q.sigma_obs == p.sigma_obs);
  CHECK(q.s_process == p.s_process);
  CHECK(q.seed == 99);
  std::stringstream b;
  save_checkpoint(q, b);
  CHECK(b.str() == text);

  std::string tampered = text;
  const auto pos = tampered.find("checksum = ") + 11;
  tampered[pos] = tampered[pos] == '0' ? '1' : '0';
  std::istringstream t1(tampered);
  CHECK_THROWS_AS(load_checkpoint(t1), ValidationError);

  std::string value_edit = text;
  const auto vpos = value_edit.find("values:\n") + 8;
  value_edit.insert(vpos, "1");
  std::istringstream t2(value_edit);
  CHECK_THROWS_AS(load_checkpoint(t2), ValidationError);

  std::string version = text;
  version.replace(version.find("format_version = 1"), 18, "format_version = 2");
  std::istringstream t3(version);
  try {
    load_checkpoint(t3);
    FAIL("expected a version error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
}
