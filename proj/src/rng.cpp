#include "cestfit/rng.hpp"

#include <numeric>

#include "cestfit/errors.hpp"

namespace cestfit {

std::vector<int> kfold_assignments(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 2 || static_cast<std::size_t>(folds) > n)
        throw InsufficientData("kfold_assignments: need 2 <= folds <= n");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<int> assignment(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos)
        assignment[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return assignment;
}

} // namespace cestfit
