__attribute__((target("default")))
double scale1(double *x, int n)
{
    for (int i = 0; i < n; ++i) {
        x[i] = 2.0 * x[i];
    }
    return x[0] + n;
}
