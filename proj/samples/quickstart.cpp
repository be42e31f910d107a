// Degree growth of the monomial map (x, y) -> (x^2 y, x y) and of the Henon map,
// computed with the library directly.

#include <iostream>

#include <rzdyn/rzdyn.hpp>

int main() {
    using namespace rzdyn;

    const MonomialMatrix A{2, 1, 1, 1};
    const auto degs = toric_degree_sequence(A, 8);
    std::cout << "monomial degrees:";
    for (long long d : degs) std::cout << ' ' << d;
    std::cout << "\n";

    const FitReport fit = fit_main_theorem(degs, spectral_radius(A), static_cast<double>(std::llabs(A.determinant())));
    std::cout << "lambda1 = " << fit.lambda1 << ", b = " << *fit.b << "\n";

    const SpectralData s = rho_tower(A, 3);
    std::cout << "rho along the tower:";
    for (double r : s.rho_seq()) std::cout << ' ' << r;
    std::cout << "\n";

    const HomMap henon = HomMap::parse({"Y*Z", "Y^2 + 3*Z^2 - 2*X*Z", "Z^2"});
    const auto hd = degree_sequence(henon, 6);
    std::cout << "henon degrees:";
    for (long long d : hd) std::cout << ' ' << d;
    std::cout << "\ntopological degree: " << topological_degree_fiber(henon).value << "\n";
    if (const auto rec = detect_recurrence(hd)) std::cout << "recurrence order " << rec->size() << "\n";
}
