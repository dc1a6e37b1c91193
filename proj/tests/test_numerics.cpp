#include <doctest.h>

#include <cmath>
#include <vector>

#include "grad_check.hpp"
#include "lsam/kernels.hpp"
#include "lsam/rng.hpp"
#include "lsam/tape.hpp"

using namespace lsam;
using gradcheck::Input;
using gradcheck::random_input;

TEST_CASE("rng: identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: moment bounds") {
  Rng rng(7);
  double nsum = 0.0, usum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) nsum += rng.normal();
  for (int i = 0; i < n; ++i) usum += rng.uniform();
  CHECK(std::abs(nsum / n) < 0.02);
  CHECK(std::abs(usum / n - 0.5) < 0.01);
}

TEST_CASE("rng: gumbel draws have the right location") {
  // E[Gumbel(0,1)] is the Euler-Mascheroni constant.
  Rng rng(11);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.gumbel();
  CHECK(std::abs(sum / n - 0.5772156649) < 0.02);
}

TEST_CASE("softmax of equal logits is uniform") {
  Tape t;
  Value x = t.leaf(Shape::mat(1, 2), std::vector<double>{0.0, 0.0});
  Value y = t.softmax_rows(x);
  CHECK(y.data()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(y.data()[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sigmoid(0) = 0.5") {
  Tape t;
  Value y = t.sigmoid(t.leaf(Shape::vec(1), std::vector<double>{0.0}));
  CHECK(y.data()[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("matmul with the identity returns the input") {
  Rng rng(3);
  std::vector<double> a(9);
  for (auto& v : a) v = rng.normal();
  std::vector<double> eye = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Tape t;
  Value r = t.matmul(t.leaf(Shape::mat(3, 3), eye), t.leaf(Shape::mat(3, 3), a));
  for (int i = 0; i < 9; ++i) CHECK(r.data()[static_cast<std::size_t>(i)] == a[static_cast<std::size_t>(i)]);
}

TEST_CASE("softmax rows sum to one and stay in [0,1]") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(24);
    for (auto& v : x) v = 8.0 * rng.normal();
    Tape t;
    Value y = t.softmax_rows(t.leaf(Shape::mat(4, 6), x));
    for (int r = 0; r < 4; ++r) {
      double s = 0.0;
      for (int c = 0; c < 6; ++c) {
        const double p = y.data()[static_cast<std::size_t>(r * 6 + c)];
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        s += p;
      }
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("shape mismatch raises a typed error naming both shapes") {
  Tape t;
  Value a = t.zeros(Shape::mat(2, 3));
  Value b = t.zeros(Shape::mat(4, 5));
  try {
    t.matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x5]") != std::string::npos);
  }
}

TEST_CASE("non-finite leaf data raises a typed error") {
  Tape t;
  std::vector<double> bad = {1.0, std::nan("")};
  CHECK_THROWS_AS(t.leaf(Shape::vec(2), bad), NumericError);
  std::vector<double> inf = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(t.leaf(Shape::vec(2), inf), NumericError);
}

TEST_CASE("backward requires a scalar loss") {
  Tape t;
  Value a = t.zeros(Shape::mat(2, 2));
  CHECK_THROWS_AS(t.backward(a), ShapeError);
}

TEST_CASE("d/dx x^2 = 2x") {
  Tape t;
  Value x = t.leaf(Shape::vec(1), std::vector<double>{3.0});
  Value loss = t.sum(t.mul(x, x));
  t.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("fan-out accumulates gradients instead of overwriting") {
  Tape t;
  Value x = t.leaf(Shape::vec(2), std::vector<double>{1.5, -0.5});
  Value twice = t.add(x, x);  // same leaf used twice
  t.backward(t.sum(twice));
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("softmax cross-entropy gradient equals softmax minus one-hot") {
  Rng rng(17);
  std::vector<double> logits(3 * 4);
  for (auto& v : logits) v = 2.0 * rng.normal();
  const std::vector<std::int32_t> labels = {2, 0, 3};
  Tape t;
  Value lg = t.leaf(Shape::mat(3, 4), logits);
  Value logp = t.log_softmax_rows(lg);
  Value loss = t.nll_mean(logp, labels);
  t.backward(loss);

  Tape t2;
  Value sm = t2.softmax_rows(t2.leaf(Shape::mat(3, 4), logits));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double expected =
          (sm.data()[static_cast<std::size_t>(r * 4 + c)] - (labels[static_cast<std::size_t>(r)] == c ? 1.0 : 0.0)) / 3.0;
      CHECK(lg.grad()[static_cast<std::size_t>(r * 4 + c)] == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

namespace {

// Scalarize an arbitrary output with fixed random weights so every element
// contributes to the finite-difference probe.
lsam::Value weighted(Tape& t, Value y, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(y.shape().numel()));
  for (auto& x : w) x = -1.0 + 2.0 * rng.uniform();
  Value wl = t.leaf(y.shape(), w);
  return t.sum(t.mul(y, wl));
}

}  // namespace

TEST_CASE("finite differences confirm every kernel gradient") {
  Rng rng(23);
  const double tol = 1e-4;
  auto run = [&](const char* name, gradcheck::Builder build, std::vector<Input> inputs) {
    const double err = gradcheck::max_gradient_error(build, std::move(inputs));
    INFO(name);
    CHECK(err < tol);
  };

  for (int trial = 0; trial < 5; ++trial) {
    std::uint64_t wseed = 1000 + static_cast<std::uint64_t>(trial);

    run("matmul",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.matmul(in[0], in[1]), wr);
        },
        {random_input(Shape::mat(3, 4), rng), random_input(Shape::mat(4, 2), rng)});

    run("matmul rank-3 lhs",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.matmul(in[0], in[1]), wr);
        },
        {random_input(Shape::cube(2, 3, 4), rng), random_input(Shape::mat(4, 2), rng)});

    run("add+mul+scale+add_scalar",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          Value y = t.add_scalar(t.scale(t.add(t.mul(in[0], in[1]), in[0]), 0.7), 0.3);
          return weighted(t, y, wr);
        },
        {random_input(Shape::mat(2, 5), rng), random_input(Shape::mat(2, 5), rng)});

    run("sub",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.sub(in[0], in[1]), wr);
        },
        {random_input(Shape::vec(6), rng), random_input(Shape::vec(6), rng)});

    run("add_bias",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.add_bias(in[0], in[1]), wr);
        },
        {random_input(Shape::cube(2, 3, 4), rng), random_input(Shape::vec(4), rng)});

    run("colwise_mul",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.colwise_mul(in[0], in[1]), wr);
        },
        {random_input(Shape::mat(3, 4), rng), random_input(Shape::vec(4), rng)});

    run("concat_cols+slice_last",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          std::vector<Value> parts = {in[0], in[1]};
          Value c = t.concat_cols(parts);
          return weighted(t, t.slice_last(c, 1, 4), wr);
        },
        {random_input(Shape::mat(3, 2), rng), random_input(Shape::mat(3, 3), rng)});

    run("stack_feats",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          std::vector<Value> parts = {in[0], in[1], in[2]};
          return weighted(t, t.stack_feats(parts), wr);
        },
        {random_input(Shape::mat(2, 3), rng), random_input(Shape::mat(2, 3), rng),
         random_input(Shape::mat(2, 3), rng)});

    run("sigmoid",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.sigmoid(in[0]), wr);
        },
        {random_input(Shape::vec(8), rng)});

    run("gelu",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.gelu(in[0]), wr);
        },
        {random_input(Shape::vec(8), rng)});

    run("softmax_rows",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.softmax_rows(in[0]), wr);
        },
        {random_input(Shape::mat(3, 5), rng)});

    run("log_softmax_rows",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.log_softmax_rows(in[0]), wr);
        },
        {random_input(Shape::mat(3, 5), rng)});

    run("masked_softmax",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.masked_softmax(in[0], in[1]), wr);
        },
        {random_input(Shape::mat(3, 5), rng),
         random_input(Shape::mat(3, 5), rng, 0.05, 0.95)});

    run("layer_norm",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.layer_norm(in[0], in[1], in[2]), wr);
        },
        {random_input(Shape::cube(2, 3, 4), rng), random_input(Shape::vec(4), rng),
         random_input(Shape::vec(4), rng)});

    run("attn_scores",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.attn_scores(in[0], in[1], 0.5), wr);
        },
        {random_input(Shape::mat(3, 4), rng), random_input(Shape::cube(3, 5, 4), rng)});

    run("attn_context",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.attn_context(in[0], in[1]), wr);
        },
        {random_input(Shape::mat(3, 5), rng, 0.05, 1.0),
         random_input(Shape::cube(3, 5, 4), rng)});

    run("rows_lookup",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          const std::vector<std::int32_t> codes = {0, 4, 2, 2};
          return weighted(t, t.rows_lookup(in[0], codes), wr);
        },
        {random_input(Shape::mat(5, 3), rng)});

    run("broadcast_row",
        [&, wseed](Tape& t, const std::vector<Value>& in) {
          Rng wr(wseed);
          return weighted(t, t.broadcast_row(in[0], 4), wr);
        },
        {random_input(Shape::vec(6), rng)});

    run("sum+mean",
        [&](Tape& t, const std::vector<Value>& in) {
          return t.add(t.sum(in[0]), t.mean(in[1]));
        },
        {random_input(Shape::mat(2, 3), rng), random_input(Shape::vec(7), rng)});

    run("nll_mean",
        [&](Tape& t, const std::vector<Value>& in) {
          const std::vector<std::int32_t> labels = {1, 0, 2};
          return t.nll_mean(t.log_softmax_rows(in[0]), labels);
        },
        {random_input(Shape::mat(3, 4), rng)});
  }
}

TEST_CASE("finite differences confirm a composite three-layer graph") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto build = [](Tape& t, const std::vector<Value>& in) {
      Value h1 = t.gelu(t.add_bias(t.matmul(in[0], in[1]), in[2]));
      Value h2 = t.sigmoid(t.add_bias(t.matmul(h1, in[3]), in[4]));
      Value logits = t.matmul(h2, in[5]);
      const std::vector<std::int32_t> labels = {0, 1, 1, 0};
      return t.nll_mean(t.log_softmax_rows(logits), labels);
    };
    std::vector<Input> inputs = {
        random_input(Shape::mat(4, 3), rng),  random_input(Shape::mat(3, 6), rng),
        random_input(Shape::vec(6), rng),     random_input(Shape::mat(6, 5), rng),
        random_input(Shape::vec(5), rng),     random_input(Shape::mat(5, 2), rng)};
    CHECK(gradcheck::max_gradient_error(build, inputs) < 1e-4);
  }
}

TEST_CASE("parallel kernels match the serial reference") {
  Rng rng(41);
  const kern::i64 n = 37, k = 19, m = 23;
  std::vector<double> a(static_cast<std::size_t>(n * k)), b(static_cast<std::size_t>(k * m));
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();

  SUBCASE("matmul is bitwise identical") {
    std::vector<double> c1(static_cast<std::size_t>(n * m)), c2(static_cast<std::size_t>(n * m));
    kern::matmul(a.data(), b.data(), c1.data(), n, k, m);
    kern::ref::matmul(a.data(), b.data(), c2.data(), n, k, m);
    CHECK(c1 == c2);
  }

  SUBCASE("matmul gradient kernels are bitwise identical") {
    std::vector<double> up(static_cast<std::size_t>(n * m));
    for (auto& v : up) v = rng.normal();
    std::vector<double> da1(a.size(), 0.1), da2(a.size(), 0.1);
    kern::matmul_acc_nt(up.data(), b.data(), da1.data(), n, k, m);
    kern::ref::matmul_acc_nt(up.data(), b.data(), da2.data(), n, k, m);
    CHECK(da1 == da2);
    std::vector<double> db1(b.size(), -0.2), db2(b.size(), -0.2);
    kern::matmul_acc_tn(a.data(), up.data(), db1.data(), n, k, m);
    kern::ref::matmul_acc_tn(a.data(), up.data(), db2.data(), n, k, m);
    CHECK(db1 == db2);
  }

  SUBCASE("softmax and masked softmax are bitwise identical") {
    std::vector<double> y1(a.size()), y2(a.size());
    kern::softmax_rows(a.data(), y1.data(), n, k);
    kern::ref::softmax_rows(a.data(), y2.data(), n, k);
    CHECK(y1 == y2);
    std::vector<double> g(a.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (i % 3 == 0) ? 0.0 : rng.uniform();
    kern::masked_softmax(a.data(), g.data(), y1.data(), n, k);
    kern::ref::masked_softmax(a.data(), g.data(), y2.data(), n, k);
    CHECK(y1 == y2);
  }

  SUBCASE("layer_norm is bitwise identical") {
    std::vector<double> gain(static_cast<std::size_t>(k)), bias(static_cast<std::size_t>(k));
    for (auto& v : gain) v = 1.0 + 0.1 * rng.normal();
    for (auto& v : bias) v = 0.1 * rng.normal();
    std::vector<double> y1(a.size()), y2(a.size()), aux1(static_cast<std::size_t>(2 * n)),
        aux2(static_cast<std::size_t>(2 * n));
    kern::layer_norm(a.data(), gain.data(), bias.data(), y1.data(), aux1.data(), n, k);
    kern::ref::layer_norm(a.data(), gain.data(), bias.data(), y2.data(), aux2.data(), n, k);
    CHECK(y1 == y2);
    CHECK(aux1 == aux2);
  }

  SUBCASE("attention kernels are bitwise identical") {
    const kern::i64 bsz = 7, d = 5, e = 8;
    std::vector<double> q(static_cast<std::size_t>(bsz * e)),
        keys(static_cast<std::size_t>(bsz * d * e)), w(static_cast<std::size_t>(bsz * d));
    for (auto& v : q) v = rng.normal();
    for (auto& v : keys) v = rng.normal();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (i % 4 == 0) ? 0.0 : rng.uniform();
    std::vector<double> s1(w.size()), s2(w.size());
    kern::attn_scores(q.data(), keys.data(), s1.data(), 0.35, bsz, d, e);
    kern::ref::attn_scores(q.data(), keys.data(), s2.data(), 0.35, bsz, d, e);
    CHECK(s1 == s2);
    std::vector<double> c1(q.size()), c2(q.size());
    kern::attn_context(w.data(), keys.data(), c1.data(), bsz, d, e);
    kern::ref::attn_context(w.data(), keys.data(), c2.data(), bsz, d, e);
    CHECK(c1 == c2);
  }

  SUBCASE("chunked reduction matches plain summation") {
    std::vector<double> x(20011);
    for (auto& v : x) v = rng.normal();
    const double s1 = kern::reduce_sum(x.data(), static_cast<kern::i64>(x.size()));
    const double s2 = kern::ref::reduce_sum(x.data(), static_cast<kern::i64>(x.size()));
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-12));
  }
}

TEST_CASE("masked softmax defines all-masked rows as zero weights") {
  Tape t;
  std::vector<double> scores = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> gates = {0.0, 0.0, 1.0, 1.0};
  Value w = t.masked_softmax(t.leaf(Shape::mat(2, 2), scores), t.leaf(Shape::mat(2, 2), gates));
  CHECK(w.data()[0] == 0.0);
  CHECK(w.data()[1] == 0.0);
  CHECK(w.data()[2] + w.data()[3] == doctest::Approx(1.0).epsilon(1e-12));
  // Gradients through the dead row stay zero.
  t.backward(t.sum(w));
}
