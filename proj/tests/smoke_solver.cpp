// Quick standalone driver used while bringing the cone solver up.
#include <iostream>

#include "d2dmsec/conic.hpp"

using namespace d2dmsec;
using namespace d2dmsec::conic;

int main() {
    {  // LP: max x s.t. x <= 3
        ConicProgram p;
        int x = p.add_scalar("x");
        p.add_ineq(LinExpr(3.0) - LinExpr::term(x, 1.0));
        p.set_objective_maximize(LinExpr::term(x, 1.0));
        auto r = p.solve();
        std::cout << "LP status=" << to_string(r.status) << " obj=" << r.objective
                  << " iters=" << r.iterations << " (expect 3)\n";
    }
    {  // SOCP: min t s.t. t >= ||(1,1)|| -> sqrt(2)
        ConicProgram p;
        int t = p.add_scalar("t");
        p.add_soc(LinExpr::term(t, 1.0), {LinExpr(1.0), LinExpr(1.0)});
        LinExpr obj = LinExpr::term(t, -1.0);
        p.set_objective_maximize(obj);
        auto r = p.solve();
        std::cout << "SOCP status=" << to_string(r.status) << " t=" << -r.objective
                  << " iters=" << r.iterations << " (expect 1.41421)\n";
    }
    {  // SDP: max Tr(C X) s.t. Tr X = 1, X >= 0, C = diag(1, 2, 5) -> 5
        ConicProgram p;
        VarRef x = p.add_hermitian(3, "X");
        CMatrix c = CMatrix::Zero(3, 3);
        c(0, 0) = 1;
        c(1, 1) = 2;
        c(2, 2) = 5;
        p.add_psd(x);
        p.add_eq(p.trace(x) - 1.0);
        p.set_objective_maximize(p.trace_product(c, x));
        auto r = p.solve();
        std::cout << "SDP status=" << to_string(r.status) << " obj=" << r.objective
                  << " iters=" << r.iterations << " (expect 5)\n";
    }
    {  // complex SDP: max Tr(C X), Tr X = 1, X >= 0 with complex C -> lambda_max
        ConicProgram p;
        VarRef x = p.add_hermitian(2, "X");
        CMatrix c(2, 2);
        c << Complex(1, 0), Complex(0, 2), Complex(0, -2), Complex(1, 0);
        p.add_psd(x);
        p.add_eq(p.trace(x) - 1.0);
        p.set_objective_maximize(p.trace_product(c, x));
        auto r = p.solve();
        std::cout << "cSDP status=" << to_string(r.status) << " obj=" << r.objective
                  << " iters=" << r.iterations << " (expect 3 = lmax of [[1,2i],[-2i,1]])\n";
    }
    {  // infeasible: x >= 1 and x <= 0
        ConicProgram p;
        int x = p.add_scalar("x");
        p.add_ineq(LinExpr::term(x, 1.0) - 1.0);
        p.add_ineq(LinExpr(0.0) - LinExpr::term(x, 1.0));
        p.set_objective_maximize(LinExpr::term(x, 1.0));
        auto r = p.solve();
        std::cout << "INF status=" << to_string(r.status) << " (expect infeasible)\n";
    }
    {  // unbounded: max x, x >= 0
        ConicProgram p;
        int x = p.add_scalar("x");
        p.add_ineq(LinExpr::term(x, 1.0));
        p.set_objective_maximize(LinExpr::term(x, 1.0));
        auto r = p.solve();
        std::cout << "UNB status=" << to_string(r.status) << " (expect unbounded)\n";
    }
    {  // exp macro: min a s.t. 1 + a >= e^phi, phi = 1
        for (double phi_val : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            ConicProgram p;
            int a = p.add_scalar("a");
            int phi = p.add_scalar("phi");
            p.add_exp_upper(LinExpr::term(a, 1.0), LinExpr::term(phi, 1.0), 6, "exp");
            p.add_eq(LinExpr::term(phi, 1.0) - phi_val);
            p.set_objective_maximize(LinExpr::term(a, -1.0));
            auto r = p.solve();
            std::cout << "EXP phi=" << phi_val << " status=" << to_string(r.status)
                      << " min_a=" << -r.objective << " expect=" << std::exp(phi_val) - 1.0
                      << " err=" << std::abs(-r.objective - (std::exp(phi_val) - 1.0)) << "\n";
        }
    }
    return 0;
}
