// Writes a BGL-style log file from the built-in synthetic corpus, for demos
// of the raglog pipeline without the public datasets.
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "raglog/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"raglog-synth: generate a synthetic BGL-style log"};
  std::size_t normals = 5000;
  std::size_t anomalies = 200;
  std::uint64_t seed = 1;
  std::string out;
  app.add_option("--normals", normals)->capture_default_str();
  app.add_option("--anomalies", anomalies)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--out", out, "Log file to write")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) {
    std::cerr << "raglog-synth: cannot write '" << out << "'\n";
    return 1;
  }
  for (const auto& e : raglog::synthetic::corpus(normals, anomalies, seed)) file << e.raw << '\n';
  std::cout << "lines=" << normals + anomalies << '\n';
  return file ? 0 : 1;
}
