// Timings for the batch kernels: serial reference vs OpenMP, with a result
// checksum so both paths can be compared for equality.
#include <chrono>
#include <cstdio>
#include <vector>

#include "panonav/fmm.hpp"
#include "panonav/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace panonav;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double batch_fmm(const std::vector<World>& worlds, int workers, double* checksum) {
  std::vector<double> sums(worlds.size(), 0.0);
  const double t0 = now_s();
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
  for (size_t i = 0; i < worlds.size(); ++i) {
    const World& w = worlds[i];
    Cell src{0, 0};
    for (int y = 1; y < w.cells_y() && src.x == 0; ++y)
      for (int x = 1; x < w.cells_x(); ++x)
        if (!w.occupied({x, y})) {
          src = {x, y};
          break;
        }
    const DistanceField f = solve_eikonal(w.obstacle_grid(), src, w.cell_size_m());
    double s = 0.0;
    for (size_t k = 0; k < f.value.size(); ++k)
      if (f.value[k] != kInfDist) s += f.value[k];
    sums[i] = s;
  }
  const double dt = now_s() - t0;
  *checksum = 0.0;
  for (double s : sums) *checksum += s;
  return dt;
}

double batch_episodes(const std::vector<World>& worlds, int workers, double* checksum) {
  std::vector<double> lens(worlds.size(), 0.0);
  const double t0 = now_s();
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
  for (size_t i = 0; i < worlds.size(); ++i) {
    Rng rng(1234 + i);
    const NavTask task = sample_task(worlds[i], Difficulty::Medium, rng);
    EpisodeConfig ec;
    ec.max_steps = 120;
    const EpisodeRecord rec = ablation_random_goal(worlds[i], task, nullptr, ec, rng);
    lens[i] = rec.path_length_m;
  }
  const double dt = now_s() - t0;
  *checksum = 0.0;
  for (double l : lens) *checksum += l;
  return dt;
}

}  // namespace

int main() {
  WorldGenConfig wg;
  wg.width_m = 12.0;
  wg.height_m = 12.0;
  std::vector<World> worlds;
  for (int i = 0; i < 24; ++i) worlds.push_back(generate_world(500 + i, wg));

#ifdef _OPENMP
  const int max_workers = omp_get_max_threads();
#else
  const int max_workers = 1;
#endif

  double cs_serial = 0, cs_par = 0;
  const double t_fmm_serial = batch_fmm(worlds, 1, &cs_serial);
  const double t_fmm_par = batch_fmm(worlds, max_workers, &cs_par);
  std::printf("batch FMM (%zu maps): serial %.3fs, %d threads %.3fs, speedup %.2fx, %s\n",
              worlds.size(), t_fmm_serial, max_workers, t_fmm_par, t_fmm_serial / t_fmm_par,
              cs_serial == cs_par ? "checksums equal" : "CHECKSUM MISMATCH");

  const double t_ep_serial = batch_episodes(worlds, 1, &cs_serial);
  const double t_ep_par = batch_episodes(worlds, max_workers, &cs_par);
  std::printf("batch episodes (%zu): serial %.3fs, %d threads %.3fs, speedup %.2fx, %s\n",
              worlds.size(), t_ep_serial, max_workers, t_ep_par, t_ep_serial / t_ep_par,
              cs_serial == cs_par ? "checksums equal" : "CHECKSUM MISMATCH");
  return 0;
}
