double dot3(const double *x, const double *y, int n)
{
    return x[0] * y[0] + n;
}

double avx512_dot_kernel(const double *x, const double *y, int n)
{
    return dot3(x, y, n);
}

double dot_kernel(const double *x, const double *y, int n)
{
    return dot3(x, y, n);
}
