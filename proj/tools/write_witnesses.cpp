// Writes the canonical taxonomy witnesses as fixture files:
//   write_witnesses OUTDIR
// producing OUTDIR/<slug>.abs plus the two model files each one references.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "absaudit/format.hpp"
#include "absaudit/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace absaudit;

namespace {

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_witness(const fs::path& dir, const std::string& stem, const Abstraction& a) {
  write(dir / a.source_ref, emit_model(*a.source));
  write(dir / a.target_ref, emit_model(*a.target));
  write(dir / (stem + ".abs"), emit_abstraction(a));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: write_witnesses OUTDIR\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  for (auto t : all_structural_types()) write_witness(dir, slug(t), canonical_witness(t));
  for (auto t : all_distributional_types()) write_witness(dir, "dist-" + slug(t), canonical_witness(t));
  return 0;
}
