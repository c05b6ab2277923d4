void convert(void)
{
    rocblas_half h;
    int n;
    h = make_half();
    n = 0;
}
