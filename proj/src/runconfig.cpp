#include <cstdlib>

#include "triquad/common.hpp"

namespace triquad {

std::atomic<u64>& Budget::limit_ref() {
    static std::atomic<u64> lim = [] {
        if (const char* env = std::getenv("TRIQUAD_BUDGET")) {
            char* end = nullptr;
            u64 v = std::strtoull(env, &end, 10);
            if (end && *end == '\0' && v > 0) return v;
        }
        return kDefault;
    }();
    return lim;
}

u64 Budget::limit() { return limit_ref().load(); }
void Budget::set_limit(u64 v) { limit_ref().store(v ? v : kDefault); }

void Budget::charge(u64 est, bool force) {
    if (!force && est > limit()) throw budget_error(est);
}

void parallel_chunks(int nchunks, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || nchunks <= 1) {
        for (int i = 0; i < nchunks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= nchunks) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int nt = std::min(workers, nchunks);
    pool.reserve(size_t(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

std::mt19937_64 seeded_rng(u64 seed, u64 stream) {
    std::seed_seq seq{seed, stream, u64(0x9e3779b97f4a7c15ull)};
    return std::mt19937_64(seq);
}

}  // namespace triquad
