#include <doctest.h>

#include "p1dgp2/dofmap.hpp"
#include "p1dgp2/error.hpp"
#include "p1dgp2/mesh_io.hpp"
#include "p1dgp2/reference.hpp"
#include "test_support.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace p1dgp2;
using testing_support::data_path;

namespace {

// Closed-form integral of prod xi_j^{a_j} over the reference simplex:
// prod a_j! / (sum a_j + dim)!.
double simplex_monomial_integral(const std::vector<int>& a)
{
    double num = 1.0;
    int total = 0;
    for (int e : a) {
        num *= std::tgamma(e + 1.0);
        total += e;
    }
    return num / std::tgamma(total + static_cast<double>(a.size()) + 1.0);
}

// All exponent tuples of length dim with total degree <= max_degree.
void exponents(int dim, int max_degree, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (static_cast<int>(cur.size()) == dim) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (int e : cur) {
        used += e;
    }
    for (int e = 0; e + used <= max_degree; ++e) {
        cur.push_back(e);
        exponents(dim, max_degree, cur, out);
        cur.pop_back();
    }
}

std::vector<double> random_barycentric(std::mt19937& rng, int dim)
{
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> l(static_cast<std::size_t>(dim + 1));
    double s = 0.0;
    for (auto& v : l) {
        v = ex(rng);
        s += v;
    }
    for (auto& v : l) {
        v /= s;
    }
    return l;
}

} // namespace

TEST_CASE("Lagrange property, partition of unity and zero gradient sum at random points")
{
    std::mt19937 rng(2024);
    for (int dim = 1; dim <= 3; ++dim) {
        for (Family fam : {Family::P1_DG, Family::P2_CG}) {
            const ReferenceElement el(dim, fam);
            CHECK(el.n_local() == (fam == Family::P1_DG ? dim + 1 : (dim + 1) * (dim + 2) / 2));
            for (int j = 0; j < el.n_local(); ++j) {
                const Eigen::VectorXd node = el.node_coords().row(j).transpose();
                const auto ev = eval_basis(el, std::span<const double>(node.data(), static_cast<std::size_t>(node.size())));
                for (int i = 0; i < el.n_local(); ++i) {
                    CHECK(std::abs(ev.values(i) - (i == j ? 1.0 : 0.0)) <= 1e-13);
                }
            }
            for (int trial = 0; trial < 50; ++trial) {
                const auto p = random_barycentric(rng, dim);
                const auto ev = eval_basis(el, p);
                CHECK(std::abs(ev.values.sum() - 1.0) <= 1e-13);
                CHECK(ev.gradients.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-13);
            }
        }
    }
}

TEST_CASE("basis spot values")
{
    const auto p2 = eval_basis(ReferenceElement(2, Family::P2_CG), std::vector<double>{1.0, 0.0, 0.0});
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
    expected(0) = 1.0;
    CHECK((p2.values - expected).norm() == 0.0);

    const auto p1 = eval_basis(ReferenceElement(1, Family::P1_DG), std::vector<double>{0.5, 0.5});
    CHECK(p1.values(0) == 0.5);
    CHECK(p1.values(1) == 0.5);
}

TEST_CASE("points outside the reference simplex are rejected")
{
    const ReferenceElement el(2, Family::P2_CG);
    CHECK_THROWS_AS(eval_basis(el, std::vector<double>{1.1, -0.1, 0.0}), DomainError);
    CHECK_THROWS_AS(eval_basis(el, std::vector<double>{0.5, 0.5, 0.5}), DomainError);
    CHECK_THROWS_AS(eval_basis(el, std::vector<double>{0.5, 0.5}), DomainError);
    CHECK_NOTHROW(eval_basis(el, std::vector<double>{1.0 + 5e-13, -5e-13, 0.0}));
}

TEST_CASE("quadrature weight sums equal the reference measure")
{
    CHECK(quadrature(2, 1).weights.sum() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(quadrature(3, 1).weights.sum() == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(quadrature(1, 4).weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(quadrature(0, 4).weights.sum() == 1.0);
}

TEST_CASE("int x^2 y^2 over the reference triangle is 1/180")
{
    const auto rule = quadrature(2, 4);
    double sum = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
        const double x = rule.points(q, 1), y = rule.points(q, 2);
        sum += rule.weights(q) * x * x * y * y;
    }
    CHECK(simplex_monomial_integral({2, 2}) == doctest::Approx(1.0 / 180.0).epsilon(1e-15));
    CHECK(std::abs(sum - 1.0 / 180.0) <= 1e-13 / 180.0);
}

TEST_CASE("quadrature exactness sweep over all monomials up to the rule degree")
{
    for (int dim = 1; dim <= 3; ++dim) {
        for (int degree = 0; degree <= 6; ++degree) {
            const auto rule = quadrature(dim, degree);
            std::vector<std::vector<int>> all;
            std::vector<int> cur;
            exponents(dim, degree, cur, all);
            for (const auto& a : all) {
                double sum = 0.0;
                for (int q = 0; q < rule.size(); ++q) {
                    double v = rule.weights(q);
                    for (int j = 0; j < dim; ++j) {
                        v *= std::pow(rule.points(q, j + 1), a[static_cast<std::size_t>(j)]);
                    }
                    sum += v;
                }
                const double exact = simplex_monomial_integral(a);
                CHECK(std::abs(sum - exact) <= 1e-13 * exact);
            }
            for (int q = 0; q < rule.size(); ++q) {
                CHECK(rule.points.row(q).minCoeff() > 0.0);
            }
        }
    }
    CHECK_THROWS_AS(quadrature(2, 7), ConfigError);
    CHECK_THROWS_AS(quadrature(4, 2), ConfigError);
}

TEST_CASE("1D P1/P2 bases with Gauss quadrature reproduce the reference element matrices")
{
    // Reference h ordering is (left vertex, midpoint, right vertex); ours is (v0, v1, mid).
    const int perm[3] = {0, 2, 1};
    const ReferenceElement p1(1, Family::P1_DG), p2(1, Family::P2_CG);
    const auto gauss2 = quadrature(1, 3);
    REQUIRE(gauss2.size() == 2);
    const auto t1 = tabulate(p1, gauss2.points);
    const auto t2 = tabulate(p2, gauss2.points);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 3), mu = Eigen::MatrixXd::Zero(2, 2);
    for (int q = 0; q < 2; ++q) {
        mu += gauss2.weights(q) * t1.values.row(q).transpose() * t1.values.row(q);
        c += gauss2.weights(q) * t1.values.row(q).transpose() * t2.gradients[static_cast<std::size_t>(q)];
    }
    const double c_ref[2][3] = {{-5.0 / 6, 2.0 / 3, 1.0 / 6}, {-1.0 / 6, -2.0 / 3, 5.0 / 6}};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 3; ++b) {
            CHECK(std::abs(c(a, perm[b]) - c_ref[a][b]) <= 1e-14);
        }
    }
    CHECK(std::abs(mu(0, 0) - 1.0 / 3) <= 1e-15);
    CHECK(std::abs(mu(0, 1) - 1.0 / 6) <= 1e-15);

    // The P2 mass matrix is degree 4: needs the 3-point rule.
    const auto gauss3 = quadrature(1, 4);
    const auto t3 = tabulate(p2, gauss3.points);
    Eigen::MatrixXd mh = Eigen::MatrixXd::Zero(3, 3);
    for (int q = 0; q < gauss3.size(); ++q) {
        mh += gauss3.weights(q) * t3.values.row(q).transpose() * t3.values.row(q);
    }
    const double mh_ref[3][3] = {{2.0 / 15, 1.0 / 15, -1.0 / 30}, {1.0 / 15, 8.0 / 15, 1.0 / 15}, {-1.0 / 30, 1.0 / 15, 2.0 / 15}};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            CHECK(std::abs(mh(perm[a], perm[b]) - mh_ref[a][b]) <= 1e-15);
        }
    }
}

TEST_CASE("DOF formulas reproduce the tabulated counts")
{
    // 2D table lists F, V, u, h; the edge count is h - V.
    struct Row2 { long f, v, u, h; };
    for (const Row2& r : {Row2{36, 24, 108, 85}, Row2{79, 48, 237, 176}, Row2{151, 87, 453, 326},
                          Row2{1586, 820, 4758, 2414}, Row2{15574, 7890, 46722, 31354}}) {
        const auto d = count_dofs(2, r.f, r.v, r.h - r.v);
        CHECK(d.u_per_component == r.u);
        CHECK(d.h == r.h);
    }
    struct Row3 { long t, v, e, u, h; };
    for (const Row3& r : {Row3{44, 26, 93, 176, 119}, Row3{215, 80, 227, 860, 307}, Row3{398, 130, 633, 1592, 763},
                          Row3{2003, 488, 2792, 8012, 3280}}) {
        const auto d = count_dofs(3, r.t, r.v, r.e);
        CHECK(d.u_per_component == r.u);
        CHECK(d.h == r.h);
    }
    // Largest 3D column: the listed u count 77640 is 4 * 19410, not 4 * 19140 (transposed
    // digits in the cell count); h = V + E holds.
    CHECK(count_dofs(3, 19140, 3690, 24165).h == 27855);
    CHECK(count_dofs(3, 19140, 3690, 24165).u_per_component == 76560);
    CHECK(count_dofs(3, 19410, 3690, 24165).u_per_component == 77640);

    const DofMap one_d(generate_interval_mesh(4, 1.0));
    CHECK(one_d.m_u() == 8);
    CHECK(one_d.m_h() == 9);
}

TEST_CASE("DofMap invariants on unstructured meshes")
{
    for (const char* name : {"square_a0p05", "square_a0p01", "cube_v0p01"}) {
        const Mesh mesh = load_mesh(data_path(name));
        const DofMap dofs(mesh);
        const int dim = mesh.dim();
        CHECK(dofs.m_u() == (dim + 1) * mesh.n_cells());
        CHECK(dofs.m_h() == mesh.n_vertices() + mesh.n_edges());

        std::vector<int> u_owner(static_cast<std::size_t>(dofs.m_u()), -1);
        std::map<int, Point> h_position;
        const ReferenceElement p2(dim, Family::P2_CG);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            for (int a : dofs.u_dofs(c)) {
                REQUIRE(a >= 0);
                REQUIRE(a < dofs.m_u());
                CHECK(u_owner[static_cast<std::size_t>(a)] == -1);
                u_owner[static_cast<std::size_t>(a)] = c;
            }
            const auto pts = mesh.cell_points(c);
            const auto hd = dofs.h_dofs(c);
            for (int k = 0; k < p2.n_local(); ++k) {
                Point x{0, 0, 0};
                for (int j = 0; j <= dim; ++j) {
                    for (int i = 0; i < 3; ++i) {
                        x[static_cast<std::size_t>(i)] += p2.node_coords()(k, j) * pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
                    }
                }
                const int g = hd[static_cast<std::size_t>(k)];
                const auto [it, inserted] = h_position.emplace(g, x);
                if (!inserted) {
                    for (int i = 0; i < 3; ++i) {
                        CHECK(std::abs(it->second[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) <= 1e-14);
                    }
                }
            }
        }
        CHECK(std::ranges::count(u_owner, -1) == 0);
        CHECK(static_cast<int>(h_position.size()) == dofs.m_h());
    }
}

TEST_CASE("periodic 1D DofMap shares the seam vertex")
{
    const Mesh m = generate_interval_mesh(5, 1.0, true);
    const DofMap d(m);
    CHECK(d.h_dofs(4)[1] == d.h_dofs(0)[0]);
    CHECK(d.m_h() == 10);
}
