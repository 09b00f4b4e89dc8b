// Brute-force misrank oracle for the bi-level round trip.
//
// Draws 10^6 (C, A) level pairs from the measured truncated normals, with the
// entry direction chosen 3'-first with probability 0.75, and counts pairs
// whose within-event ordering puts the A segment at or above the C segment.
// Prints the misrank rate and the derived bound P = 100 (1 - misrank) - 1.
#include <cstdio>
#include <random>

namespace {

double truncated(std::mt19937_64& rng, double mean, double sd)
{
    std::normal_distribution<double> n(mean, sd);
    for (;;) {
        double x = n(rng);
        if (x > 0.0 && x < 1.0) return x;
    }
}

} // namespace

int main()
{
    std::mt19937_64 rng(20040101);
    std::bernoulli_distribution three_prime_first(0.75);
    const long draws = 1000000;
    long misranked = 0;
    for (long i = 0; i < draws; ++i) {
        double c, a;
        if (three_prime_first(rng)) {
            c = truncated(rng, 0.37, 0.09);
            a = truncated(rng, 0.17, 0.04);
        } else {
            c = truncated(rng, 0.20, 0.03);
            a = truncated(rng, 0.12, 0.04);
        }
        if (a >= c) ++misranked;
    }
    double rate = static_cast<double>(misranked) / draws;
    std::printf("misrank_rate=%.6f\nP=%.4f\n", rate, 100.0 * (1.0 - rate) - 1.0);
}
