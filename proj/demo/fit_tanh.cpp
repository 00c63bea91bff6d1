// Fits tanh(5x) with re-uploading UAT circuits of growing depth and compares
// against the classical cosine network with the same number of terms.

#include <cstdio>

#include "qapprox/qapprox.hpp"

int main() {
  using namespace qapprox;
  const GridSpec grid = GridSpec::line(101);
  const Dataset data = make_dataset(prepare_target("tanh5", grid), grid);

  FitSettings settings;
  settings.restarts = 5;
  settings.seed = 1;
  settings.workers = default_workers();

  std::printf("layers  quantum_uat   classical_uat\n");
  for (std::size_t layers = 1; layers <= 4; ++layers) {
    const FitResult q = fit_circuit(CircuitModel::uat(layers), data, Benchmark::Z, settings);
    const ClassicalUatFit c = classical_uat_fit(data, layers, Activation::Cosine, settings);
    std::printf("%6zu  %.3e     %.3e\n", layers, q.best_loss, c.fit.best_loss);
  }
}
