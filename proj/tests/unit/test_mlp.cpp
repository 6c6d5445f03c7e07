#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dwmpc/mlp.hpp"

using namespace dwmpc;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("scalar network matches the hand-computed forward pass") {
  Mlp mlp({1, 1, 1});
  mlp.weight(0)(0, 0) = 0.7;
  mlp.bias(0)(0) = -0.2;
  mlp.weight(1)(0, 0) = 1.3;
  mlp.bias(1)(0) = 0.05;

  const double x = 0.4;
  const double expect = 1.3 * std::tanh(0.7 * x - 0.2) + 0.05;
  VecX in(1);
  in << x;
  CHECK(mlp.forward(in)(0) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("zero-initialized network returns the bias chain") {
  Mlp mlp({8, 32, 32, 3});
  VecX in = VecX::Ones(8);
  CHECK(mlp.forward(in).norm() == 0.0);
}

TEST_CASE("backward pass matches central finite differences") {
  Rng rng(101);
  Mlp mlp = Mlp::random_init({4, 8, 3}, rng);
  VecX in(4);
  for (int i = 0; i < 4; ++i) in(i) = rng.normal();
  VecX dout(3);
  for (int i = 0; i < 3; ++i) dout(i) = rng.normal();

  Mlp::Tape tape;
  mlp.forward(in, tape);
  Mlp grad({4, 8, 3});
  const VecX din = mlp.backward(tape, dout, grad);

  // Loss L = dout . f(in): check d L / d theta and d L / d in.
  const VecX theta = mlp.flatten();
  const VecX gflat = grad.flatten();
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < theta.size(); k += 7) {
    Mlp plus = mlp, minus = mlp;
    VecX tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    plus.set_from_flat(tp);
    minus.set_from_flat(tm);
    const double fd = (dout.dot(plus.forward(in)) - dout.dot(minus.forward(in))) / (2.0 * h);
    CHECK(gflat(k) == doctest::Approx(fd).epsilon(1e-5));
  }
  for (int k = 0; k < 4; ++k) {
    VecX ip = in, im = in;
    ip(k) += h;
    im(k) -= h;
    const double fd = (dout.dot(mlp.forward(ip)) - dout.dot(mlp.forward(im))) / (2.0 * h);
    CHECK(din(k) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("save/load round trip is bit exact") {
  Rng rng(55);
  const Mlp mlp = Mlp::random_init({8, 32, 32, 3}, rng);
  const auto path = temp_file("dwmpc_mlp_roundtrip.txt");
  mlp.save(path);
  const Mlp loaded = Mlp::load(path);

  CHECK(loaded.layer_sizes() == mlp.layer_sizes());
  VecX in(8);
  for (int i = 0; i < 8; ++i) in(i) = rng.normal();
  const VecX a = mlp.forward(in);
  const VecX b = loaded.forward(in);
  CHECK(a == b);
  std::filesystem::remove(path);
}

TEST_CASE("weight file errors carry location information") {
  Rng rng(56);
  const Mlp mlp = Mlp::random_init({2, 3, 1}, rng);
  const auto path = temp_file("dwmpc_mlp_corrupt.txt");

  SUBCASE("truncated file names the line") {
    mlp.save(path);
    std::ifstream in(path);
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path);
    out << contents.substr(0, contents.size() / 2);
    out.close();
    try {
      Mlp::load(path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(path.string()) != std::string::npos);
      CHECK(std::string(e.what()).find(':') != std::string::npos);
    }
  }
  SUBCASE("bad version is rejected") {
    std::ofstream out(path);
    out << "knode-mlp 9\nlayers 2 3 1\nactivation tanh\n";
    out.close();
    CHECK_THROWS_AS(Mlp::load(path), ParseError);
  }
  SUBCASE("header/body dimension mismatch is rejected") {
    mlp.save(path);
    std::ifstream in(path);
    std::string line, contents;
    bool first = true;
    while (std::getline(in, line)) {
      if (first && line.rfind("knode-mlp", 0) == 0) {
        contents += line + "\n";
        contents += "layers 2 4 1\n";  // wrong hidden size
        std::getline(in, line);        // drop the real layers line
        first = false;
        continue;
      }
      contents += line + "\n";
    }
    in.close();
    std::ofstream out(path);
    out << contents;
    out.close();
    CHECK_THROWS_AS(Mlp::load(path), ParseError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("flatten round trip and arithmetic") {
  Rng rng(77);
  Mlp a = Mlp::random_init({3, 5, 2}, rng);
  const VecX flat = a.flatten();
  Mlp b({3, 5, 2});
  b.set_from_flat(flat);
  CHECK(b.flatten() == flat);

  Mlp c = a;
  c.add_scaled(b, -1.0);
  CHECK(c.squared_norm() == 0.0);
}
