__attribute__((target("sse2")))
float dotf(const float *x, const float *y, int n)
{
    float s = 0.0;
    return s + x[0] * y[0] + n;
}

double plain(const double *x, int n)
{
    return x[0] + n;
}
