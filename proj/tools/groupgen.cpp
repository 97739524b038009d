// Regenerates the group files shipped under configs/.  Deterministic: the
// ping-pong certification grid is seeded inside the library.

#include <filesystem>
#include <iostream>

#include "horocount/groups.hpp"
#include "horocount/io.hpp"

using horo::BoundaryPoint;
using horo::Frame;
using horo::Row;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "configs";
  std::filesystem::create_directories(dir);
  try {
    const Frame F = Frame::make(2);
    auto bd = [&](double x, double y) {
      Row w(2);
      w << x, y;
      return horo::boundary_from_direction(F, w);
    };
    // rank-2 free group, orthogonal axes through the base point,
    // translation length 4
    horo::forge::GroupSpec schottky = horo::forge::build_schottky(
        F,
        {{bd(1, 0), bd(-1, 0)}, {bd(0, 1), bd(0, -1)}},
        4.0, "schottky2");
    horo::forge::save_group(schottky, dir + "/schottky2.group.json");
    std::cout << "schottky2: margin " << schottky.cert.margin
              << ", contraction " << schottky.cert.contraction << "\n";

    // same axes at translation length 2.4, just above the certification
    // floor: the orbit is dense enough in norm that ratio sweeps leave the
    // discrete-spectrum regime within the first grid decade
    horo::forge::GroupSpec dense = horo::forge::build_schottky(
        F,
        {{bd(1, 0), bd(-1, 0)}, {bd(0, 1), bd(0, -1)}},
        2.4, "schottky2-dense");
    horo::forge::save_group(dense, dir + "/schottky2-dense.group.json");
    std::cout << "schottky2-dense: margin " << dense.cert.margin
              << ", contraction " << dense.cert.contraction << "\n";

    horo::forge::GroupSpec lattice = horo::forge::sl2z_lattice();
    horo::forge::save_group(lattice, dir + "/sl2z.group.json");
    std::cout << "sl2z: " << lattice.generators.size() << " generators\n";
  } catch (const horo::io::Error& e) {
    std::cerr << e.to_json().dump() << "\n";
    return 1;
  }
  return 0;
}
