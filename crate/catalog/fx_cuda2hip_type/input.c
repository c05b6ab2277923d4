void convert(void)
{
    __half h;
    int n;
    h = make_half();
    n = 0;
}
