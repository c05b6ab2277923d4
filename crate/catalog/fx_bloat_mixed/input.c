__attribute__((target("avx512")))
double norm(const double *x, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * x[i];
    }
    return s;
}

__attribute__((target("avx2")))
double norm(const double *x, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * x[i];
    }
    return s;
}

__attribute__((target("default")))
double norm(const double *x, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * x[i];
    }
    return s;
}
