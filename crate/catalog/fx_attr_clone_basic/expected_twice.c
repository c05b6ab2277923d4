__attribute__((target("avx2","avx512","fma")))
double dotp(const double *x, const double *y, int n)
{
    // add and modify avx512-specific code only
    // add and modify avx512-specific code only
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s;
}

double plain(const double *x, int n)
{
    return x[0] + n;
}
