#include "fibrehom/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "fibrehom/types.hpp"

namespace fibrehom {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::flagged: return "flagged";
  }
  return "?";
}

double SweepRow::aux_value(const std::string& key) const {
  for (const auto& [k, v] : aux) {
    if (k == key) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool SweepResult::all_pass() const {
  for (const auto& r : rows) {
    if (r.verdict == Verdict::fail) return false;
  }
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

double SweepResult::max_err_ratio() const {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    if (std::isnan(r.bound) || !(r.bound > 0.0)) continue;
    const double q = r.err / r.bound;
    if (std::isnan(best) || q > best) best = q;
  }
  return best;
}

void SweepResult::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.theta != b.theta) {
      return std::lexicographical_compare(a.theta.begin(), a.theta.end(), b.theta.begin(),
                                          b.theta.end());
    }
    return a.eps > b.eps;
  });
}

const SweepCheck* SweepResult::find_check(const std::string& key) const {
  for (const auto& c : checks) {
    if (c.name == key) return &c;
  }
  return nullptr;
}

std::vector<std::pair<double, double>> SweepResult::max_err_by_eps() const {
  std::map<double, double, std::greater<>> by_eps;
  for (const auto& r : rows) {
    auto [it, inserted] = by_eps.emplace(r.eps, r.err);
    if (!inserted) it->second = std::max(it->second, r.err);
  }
  return {by_eps.begin(), by_eps.end()};
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  SlopeFit fit;
  if (lx.size() < 2) return fit;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

void fit_sweep_slope(SweepResult& result) {
  const auto per_eps = result.max_err_by_eps();
  std::vector<double> xs, ys;
  for (const auto& [e, err] : per_eps) {
    xs.push_back(e);
    ys.push_back(err);
  }
  const SlopeFit fit = fit_loglog(xs, ys);
  result.slope = fit.slope;
  result.slope_residual = fit.residual;
}

std::vector<double> log_spaced(double start, double stop, int count) {
  if (count < 1 || !(start > 0.0) || !(stop > 0.0)) {
    throw InputError("log_spaced: need count >= 1 and positive endpoints");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const double a = std::log10(start);
  const double b = std::log10(stop);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  }
  out.front() = start;
  out.back() = stop;
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("FIBREHOM_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fibrehom
