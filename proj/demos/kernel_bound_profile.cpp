// Prints ℳ(K - a) against π^n |K|^2 𝒦(ia, ia) as a moves from the barycenter
// toward a vertex, for the square, the triangle and the cube.

#include <mahlerlab/proofcheck.hpp>

#include <cstdio>

using namespace mahlerlab;

int main() {
  const std::vector<catalog::NamedBody> bodies = {
      {"cube/2", catalog::cube(2)}, {"simplex/2", catalog::simplex(2)}, {"cube/3", catalog::cube(3)}};
  for (const auto& nb : bodies) {
    const Vec b = geom::barycenter(nb.body);
    const Vec v = geom::vertices(nb.body).front();
    std::printf("%s\n  %6s %14s %14s %10s\n", nb.name.c_str(), "t", "mahler", "kernel side", "ratio");
    for (double t : {0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
      const Vec a = b + t * (v - b);
      const auto r = proofcheck::check_mahler_kernel_bound("profile", nb.name, nb.body, a);
      std::printf("  %6.2f %14.6g %14.6g %10.4f\n", t, r.lhs, r.rhs, r.lhs / r.rhs);
    }
  }
}
