void copy2(double *dst, const double *src, int n)
{
    for (int j = 0; j < n; ++j)
    {
        dst[j] = src[j];
    }
}
