#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

namespace compshop {

// Execution policy for the data-parallel kernels. Serial is the reference implementation
// the OpenMP path is tested against.
enum class Exec { Serial, Parallel };

template <class F>
std::vector<double> tabulate_serial(std::span<const double> xs, F&& f) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  return out;
}

// Evaluates f at every point with an OpenMP loop. The first exception thrown by any
// worker is rethrown on the calling thread.
template <class F>
std::vector<double> tabulate_parallel(std::span<const double> xs, F&& f) {
  std::vector<double> out(xs.size());
  std::exception_ptr err = nullptr;
  const auto n = static_cast<long>(xs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(compshop_tabulate_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

template <class F>
std::vector<double> tabulate(std::span<const double> xs, F&& f, Exec exec) {
  return exec == Exec::Parallel ? tabulate_parallel(xs, f) : tabulate_serial(xs, f);
}

// Index-based variant for kernels whose output is not a function of a scalar grid.
template <class T, class F>
std::vector<T> map_indices(std::size_t n, F&& f, Exec exec) {
  std::vector<T> out(n);
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::exception_ptr err = nullptr;
  const auto m = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < m; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(compshop_map_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace compshop
